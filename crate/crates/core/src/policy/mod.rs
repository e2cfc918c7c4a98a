//! Teacher and student planners and the distillation losses between them.

pub mod candidates;
pub mod query;
pub mod student;
pub mod teacher;

pub use candidates::{constant_velocity_prior, generate_candidates, CandidateConfig, CandidateSet, Provenance, N_ANCHORS};
pub use query::{policy_distill_loss, PlanQuery, QueryProjection};
pub use student::{
    fd_directions, feature_dim as student_feature_dim, observation_features, reward_distill_loss, student_plan, train_student,
    DistillTerms, FdBasis, LossTerms, Student, StudentConfig, StudentParams, StudentSample, TrainedStudent,
};
pub use teacher::{Interaction, Scorer, Teacher, TeacherConfig, TeacherOutput};

use crate::error::{Error, Result};
use crate::geom::{Pose, Vec2};
use crate::kinematics::Trajectory;
use crate::world::{encode_observation, WorldConfig, WorldFrame, SUMMARY_DIM};

/// World summary of a frame seen from `pose`, with the nearest-ahead entry
/// scaled into `[0, 1]` by the clearance cap.
pub fn observation_summary(frame: &WorldFrame, pose: Pose, cfg: &WorldConfig) -> [f64; SUMMARY_DIM] {
    let mut s = encode_observation(frame, Some(pose), cfg).summary;
    s[4] /= cfg.clearance_cap;
    s
}

/// `plan − prior` at waypoints `1..=T`, rotated into the ego frame and
/// flattened as `[lon_1, lat_1, lon_2, lat_2, ...]`.
pub fn ego_frame_offsets(plan: &Trajectory, prior: &Trajectory, heading: f64) -> Result<Vec<f64>> {
    if plan.len() != prior.len() {
        return Err(Error::Horizon {
            needed: prior.steps(),
            got: plan.steps(),
        });
    }
    Ok((1..plan.len())
        .flat_map(|k| {
            let d = (plan.waypoints[k] - prior.waypoints[k]).rotate(-heading);
            [d.x, d.y]
        })
        .collect())
}

/// Inverse of [`ego_frame_offsets`].
pub fn apply_offsets(prior: &Trajectory, offsets: &[f64], heading: f64) -> Result<Trajectory> {
    if offsets.len() != 2 * prior.steps() {
        return Err(Error::Shape(format!(
            "{} offsets for a {}-step prior",
            offsets.len(),
            prior.steps()
        )));
    }
    let mut w = prior.waypoints.clone();
    for k in 1..w.len() {
        w[k] += Vec2::new(offsets[2 * (k - 1)], offsets[2 * (k - 1) + 1]).rotate(heading);
    }
    Trajectory::from_motion(w, prior.dt, heading)
}
