//! Motion control for a small quadruped whose front legs double as
//! tendon-driven manipulators.
//!
//! * [`profile`]: 15-phase jerk-limited point-to-point trajectories, sampling
//!   and servo pulse conversion.
//! * [`sync`]: time-synchronised moves of several joints.
//! * [`kinematics`]: leg and dactylus kinematics, centre of mass, support
//!   polygon and stability margin.
//! * [`tendon`]: reaction force and grip regulation of a compliant joint.
//! * [`oracle`]: numerical integration used to cross-check trajectories.
//!
//! The numeric modules are generic over [`Real`]; the aliases below fix the
//! scalar to `f64` (or `f32` where suffixed).

pub mod error;
pub mod export;
pub mod kinematics;
pub mod model;
pub mod oracle;
pub mod profile;
pub mod scalar;
pub mod sync;
pub mod tendon;

pub use error::{Error, Result};
pub use scalar::Real;

pub type MotionLimits = profile::MotionLimits<f64>;
pub type PlannedTrajectory = profile::PlannedTrajectory<f64>;
pub type SampledTrajectory = profile::SampledTrajectory<f64>;
pub type ServoCalibration = profile::ServoCalibration<f64>;
pub type Thresholds = profile::Thresholds<f64>;
pub type SyncPlan = sync::SyncPlan<f64>;
pub type SyncSamples = sync::SyncSamples<f64>;
pub type LegModel = kinematics::LegModel<f64>;
pub type DactylusModel = kinematics::DactylusModel<f64>;
pub type RobotModel = kinematics::RobotModel<f64>;
pub type StanceConfig = kinematics::StanceConfig<f64>;
pub type MassModel = kinematics::MassModel<f64>;
pub type ExactMassModel = kinematics::MassModel<num_rational::Ratio<i64>>;
pub type TendonJoint = tendon::TendonJoint<f64>;
pub type TendonParams = tendon::TendonParams<f64>;

pub type MotionLimitsF32 = profile::MotionLimits<f32>;
pub type PlannedTrajectoryF32 = profile::PlannedTrajectory<f32>;
pub type SampledTrajectoryF32 = profile::SampledTrajectory<f32>;
pub type LegModelF32 = kinematics::LegModel<f32>;
pub type TendonJointF32 = tendon::TendonJoint<f32>;

pub use kinematics::Contact;
pub use profile::TrajectoryType;
