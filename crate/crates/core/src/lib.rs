//! Tooling for directional point tracking on 360° video.
//!
//! The crate turns equirectangular clips into narrow field-of-view
//! perspective clips under synthetic camera trajectories, carries point
//! tracks along as per-frame unit directions in the camera frame, and scores
//! direction predictions with angular metrics split by whether the ground
//! truth lies inside or outside the viewport.
//!
//! Conventions used throughout:
//!
//! * camera frame: `+x` right, `+y` down, `+z` forward;
//! * rotations are stored camera-to-world (columns are the camera axes
//!   expressed in world coordinates);
//! * the world frame is the camera frame at the identity rotation, and the
//!   centre of an equirectangular image looks along world `+z`;
//! * all angles in files and on the command line are degrees.

pub mod curation;
pub mod error;
pub mod formats;
pub mod frame;
pub mod geometry;
pub mod metrics;
pub mod motion;
pub mod resample;
pub mod rng;
pub mod synth;
pub mod tracks;

#[cfg(feature = "cli")]
pub mod cli;

pub use error::{Error, Result};
pub use frame::{BinaryMask, EquirectFrame, PerspectiveFrame, RgbImage};
pub use geometry::{
    angular_distance, direction_to_equirect, direction_to_pixel, equirect_to_direction,
    euler_to_rotation, pixel_to_direction, procrustes_so3, rotate_world_to_camera, EquirectGrid,
    EulerAngles, Intrinsics, Rotation, UnitDirection, Vec3,
};
pub use motion::{MotionKind, MotionSpec, Trajectory};
