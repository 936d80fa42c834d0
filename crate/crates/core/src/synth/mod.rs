//! Synthetic target/source generators paired with their exact Bayes rules.
//!
//! Eight settings are provided: logistic, probit, LDA, QDA, a Gaussian mixture
//! with a shift parameter, a four-class quadrant model, and linear and
//! nonlinear regression. Each [`Setting`] holds the target parameters plus a
//! similarity knob (a cosine or a mixing weight); resolving it for a [`Role`]
//! gives an [`OracleModel`] that can both sample data and evaluate the Bayes
//! rule.

mod generator;
mod oracle;
mod rotation;

pub use generator::{ar_covariance, sample_dataset, GeneratorSpec, Role, Setting, SettingKind};
pub use oracle::{bayes_predict, OracleModel};
pub use rotation::{
    from_hyperspherical, orthogonal_complement, rotate_to_cosine, to_hyperspherical, RotationSpec,
};
