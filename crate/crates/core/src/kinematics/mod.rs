//! Leg and dactylus kinematics, mass distribution and static stability.

pub mod dactylus;
pub mod leg;
pub mod mass;
pub mod robot;
pub mod support;

pub use dactylus::{base_angle_for_aperture, dactylus_aperture, DactylusModel, DactylusPose};
pub use leg::{fk_leg, ik_leg, leg_points, JointRange, LegModel, LegPoints, Vec3};
pub use mass::{moi_report, parse_decimal, MassModel, MoiReport, MoiTable};
pub use robot::{BodyModel, Contact, LegJoints, RobotModel, StanceConfig};
pub use support::{convex_hull, signed_distance, stability_margin, Point2};
