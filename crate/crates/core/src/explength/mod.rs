//! Exponential length and reduced exponential length: certificates, rigorous
//! lower bounds, closed forms, and a randomized factorization search that
//! produces upper bounds.

mod bounds;
mod certificate;
mod minimality;
mod search;
mod trotter;

pub use bounds::{el_exact_positive_diagonal, el_exact_unitary, el_lower_bound};
pub use certificate::{ElBracket, FactorizationCertificate, LowerMethod};
pub use minimality::{minimality_check, MinimalityReport};
pub use search::{el_estimate, rel_estimate, EstimateOptions, RelEstimate, SearchBudget};
pub use trotter::{trotter_check, TrotterErrors};
