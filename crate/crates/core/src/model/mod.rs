//! Domain geometry, cell fields, the obstacle and initial-datum catalog, and
//! validation of the standing assumptions.

mod field;
mod grid;
mod initial;
mod obstacle;
mod scenario;
mod table;

pub use field::{project_to_cells, CellField};
pub use grid::Grid;
pub use initial::{builtin_initial, InitialDatum, InitialKind, BUILTIN_INITIAL};
pub use obstacle::{builtin_obstacle, Obstacle, ObstacleKind, BUILTIN_OBSTACLES};
pub use scenario::{validate_scenario, Scenario, Severity, Violation, ViolationKind};
pub use table::Table;
