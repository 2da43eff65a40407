//! Reproduction harness: scans, the Mouse algorithm, occupancy, exit-law
//! tests and scaling fits.

pub mod boxes;
pub mod exit;
pub mod fit;
pub mod mouse;
pub mod scan;

pub use boxes::{balls_in_boxes, occupancy_bound, occupancy_exact, BoxesResult};
pub use exit::{exit_uniformity, exit_uniformity_with_law, ExitTest};
pub use fit::{fit, linear_regression, FitForm, FitResult};
pub use mouse::{check_mouse, mouse_select, ClassPartition, MouseCheck, MouseResult};
pub use scan::{
    abelian_check, lower_bound_scan, shape_scan, LowerBoundConstants, LowerBoundScan, ScanConfig, ShapeScan,
};
