//! Conjugate Gaussian machinery: beliefs, exact posterior updates, the log
//! marginal likelihood and maximum likelihood fitting of the prior.

mod belief;
pub(crate) mod design;
mod fit;
pub(crate) mod likelihood;
pub(crate) mod linalg;
mod persist;

pub use belief::{prior_belief, GaussianBelief, HyperParams, PlayerMarginal};
pub use fit::{fit_hyperparameters, profile_loglik, FitOptions, HyperFit, HyperStdErrors};
pub use likelihood::{log_marginal_likelihood, log_marginal_likelihood_under, posterior_update, update_with_evidence};
pub use persist::{read_belief, write_belief, BELIEF_FORMAT, BELIEF_VERSION};
