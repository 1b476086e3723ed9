use crate::error::{Error, Result};
use crate::velocity::{VelocityKind, VelocityModel};
use crate::Scalar;

/// The interface flux `f(q) = V_eps(o - q) q` with the obstacle frozen at the
/// interface, plus the location of its maximum on `[0, o]`.
///
/// `f` is concave on `[0, o]` for every velocity kind (`f'' = -2V' + qV''`
/// with `V' >= 0`, `V'' <= 0`) and increasing for `q < 0`, so it is unimodal
/// on any interval below `o`. The Riemann problem then only needs the
/// endpoints and the peak.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxEval<T> {
    o_iface: T,
    model: VelocityModel<T>,
    peak_q: T,
    peak_flux: T,
}

const SAMPLES: usize = 64;

impl<T: Scalar> FluxEval<T> {
    pub fn new(o_iface: T, model: VelocityModel<T>) -> Result<Self> {
        if !(o_iface.is_finite() && o_iface > T::zero()) {
            return Err(Error::InvalidInput(format!(
                "obstacle at interface must be positive, got {o_iface}"
            )));
        }
        let mut fe = Self { o_iface, model, peak_q: T::zero(), peak_flux: T::zero() };
        fe.peak_q = match model.kind() {
            VelocityKind::Exponential => fe.peak_by_bisection(),
            _ => fe.peak_by_sampling(),
        };
        fe.peak_flux = fe.flux(fe.peak_q);
        Ok(fe)
    }

    pub fn obstacle(&self) -> T {
        self.o_iface
    }

    pub fn model(&self) -> &VelocityModel<T> {
        &self.model
    }

    /// Maximizer and maximum of `f` on `[0, o]`.
    pub fn peak(&self) -> (T, T) {
        (self.peak_q, self.peak_flux)
    }

    #[inline]
    pub fn flux(&self, q: T) -> T {
        self.model.value_unchecked((self.o_iface - q).max(T::zero())) * q
    }

    /// `f'(q) = V(o - q) - q V'(o - q)`.
    #[inline]
    pub fn flux_deriv(&self, q: T) -> T {
        let (v, d) = self.model.value_and_deriv((self.o_iface - q).max(T::zero()));
        v - q * d
    }

    /// `f'` is strictly decreasing on `[0, o]` with `f'(0) > 0 > f'(o)`.
    fn peak_by_bisection(&self) -> T {
        let (mut lo, mut hi) = (T::zero(), self.o_iface);
        let tol = T::epsilon() * T::lit(4.0) * self.o_iface;
        for _ in 0..200 {
            if hi - lo <= tol {
                break;
            }
            let mid = (lo + hi) * T::lit(0.5);
            if self.flux_deriv(mid) > T::zero() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        (lo + hi) * T::lit(0.5)
    }

    /// Dense sampling to bracket the maximum, then golden-section refinement.
    fn peak_by_sampling(&self) -> T {
        let h = self.o_iface / T::from_usize_lossy(SAMPLES - 1);
        let node = |k: usize| T::from_usize_lossy(k) * h;
        let best = (0..SAMPLES)
            .max_by(|&a, &b| self.flux(node(a)).partial_cmp(&self.flux(node(b))).unwrap())
            .unwrap_or(0);
        let (mut a, mut b) = (node(best.saturating_sub(1)), node((best + 1).min(SAMPLES - 1)));
        let ratio = T::lit(0.618_033_988_749_894_8);
        let tol = T::epsilon() * T::lit(16.0) * self.o_iface;
        let mut c = b - ratio * (b - a);
        let mut d = a + ratio * (b - a);
        let (mut fc, mut fd) = (self.flux(c), self.flux(d));
        for _ in 0..200 {
            if b - a <= tol {
                break;
            }
            if fc >= fd {
                b = d;
                d = c;
                fd = fc;
                c = b - ratio * (b - a);
                fc = self.flux(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + ratio * (b - a);
                fd = self.flux(d);
            }
        }
        let mid = (a + b) * T::lit(0.5);
        // the sampled node may beat the refined point when the peak sits at an endpoint
        [mid, node(best)]
            .into_iter()
            .max_by(|&x, &y| self.flux(x).partial_cmp(&self.flux(y)).unwrap())
            .unwrap()
    }

    /// Godunov flux for already-validated states `q_left, q_right <= o`:
    /// the minimum of `f` between them when `q_left <= q_right`, otherwise the maximum.
    #[inline]
    pub fn riemann(&self, q_left: T, q_right: T) -> T {
        if q_left <= q_right {
            self.flux(q_left).min(self.flux(q_right))
        } else if self.peak_q < q_right {
            self.flux(q_right)
        } else if self.peak_q > q_left {
            self.flux(q_left)
        } else {
            self.peak_flux
        }
    }
}

/// Godunov interface flux with the input contract of the inviscid solver:
/// states within `1e-12` of `[0, o]` are clamped, anything further out is rejected.
pub fn godunov_flux<T: Scalar>(q_left: T, q_right: T, fe: &FluxEval<T>) -> Result<T> {
    let tol = T::roundoff_tol();
    let clamp = |q: T| -> Result<T> {
        if !(q >= -tol && q <= fe.o_iface + tol) {
            return Err(Error::FluxInputOutOfBounds {
                value: q.as_f64(),
                upper: fe.o_iface.as_f64(),
            });
        }
        Ok(q.max(T::zero()).min(fe.o_iface))
    };
    Ok(fe.riemann(clamp(q_left)?, clamp(q_right)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exp_model(eps: f64) -> VelocityModel<f64> {
        VelocityModel::exponential(eps).unwrap()
    }

    #[test]
    fn rest_state_and_consistency() {
        let fe = FluxEval::new(1.5, exp_model(0.25)).unwrap();
        assert_eq!(godunov_flux(0.0, 0.0, &fe).unwrap(), 0.0);
        for q in [0.1, 0.7, 1.2, 1.5] {
            assert_eq!(godunov_flux(q, q, &fe).unwrap(), fe.flux(q));
        }
    }

    #[test]
    fn rarefaction_side_takes_the_minimum() {
        let fe = FluxEval::new(1.5, exp_model(0.25)).unwrap();
        let expected = (1.0 - (-5.2f64).exp()) * 0.2;
        let got = godunov_flux(0.2, 1.0, &fe).unwrap();
        assert!((got - expected).abs() < 1e-15);
        assert!((got - 0.19890).abs() < 1e-5);
    }

    #[test]
    fn peak_satisfies_first_order_condition() {
        for eps in [1.0, 0.1, 1.0 / 1024.0] {
            let fe = FluxEval::new(0.8, exp_model(eps)).unwrap();
            let (q, _) = fe.peak();
            assert!(fe.flux_deriv(q).abs() < 1e-6 / eps, "eps {eps}");
        }
    }

    #[test]
    fn sampled_peak_for_other_kinds() {
        for kind in [VelocityKind::Tanh, VelocityKind::ClippedLinear] {
            for eps in [2.0, 0.3, 1.0 / 256.0] {
                let model = VelocityModel::new(kind, eps).unwrap();
                let fe = FluxEval::new(1.1, model).unwrap();
                let (_, fmax) = fe.peak();
                let brute = (0..=100_000)
                    .map(|k| fe.flux(1.1 * k as f64 / 100_000.0))
                    .fold(f64::MIN, f64::max);
                assert!(fmax >= brute - 1e-12, "{kind} eps {eps}: {fmax} < {brute}");
            }
        }
    }

    #[test]
    fn out_of_bounds_inputs() {
        let fe = FluxEval::new(1.0, exp_model(0.1)).unwrap();
        assert!(godunov_flux(-1e-13, 0.5, &fe).is_ok());
        assert!(godunov_flux(0.5, 1.0 + 5e-13, &fe).is_ok());
        assert!(matches!(
            godunov_flux(-1e-9, 0.5, &fe),
            Err(Error::FluxInputOutOfBounds { .. })
        ));
        assert!(godunov_flux(0.5, 1.01, &fe).is_err());
        assert!(FluxEval::new(0.0, exp_model(0.1)).is_err());
    }

    #[test]
    fn flux_vanishes_at_the_obstacle() {
        let fe = FluxEval::new(0.9, exp_model(0.05)).unwrap();
        assert_eq!(fe.flux(0.0), 0.0);
        assert_eq!(fe.flux(0.9), 0.0);
    }
}
