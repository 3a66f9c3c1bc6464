//! Ratings, dominance probabilities, lineup matchups and award picks derived
//! from posterior beliefs.

mod awards;
mod best;
mod matchup;
mod pairwise;
mod table;

pub use awards::{select_awards, Award, AwardSlate};
pub use best::{prob_best, BestProbabilities};
pub use matchup::{lineup_matchup, lineup_matchup_points, Matchup};
pub use pairwise::{pairwise_matrix, pairwise_prob, write_pairwise_csv};
pub use table::{centred_ratings, read_ratings_csv, ModelTag, RatingEntry, RatingKind, RatingRow, RatingsColumn, RatingsTable};
