//! Construction, verification and bounding of colorings of `[n]` that avoid
//! monochromatic (and rainbow) k-term arithmetic progressions.
//!
//! The pieces, bottom-up:
//!
//! * [`ap`]: colorings, progression enumeration and the exact mono/rainbow
//!   verifier every other module is checked against.
//! * [`primes`]: deterministic primality and short-interval prime windows.
//! * [`lll`]: resampling construction of mono-free colorings of
//!   `floor(r^(k-1) / 8k)` cells.
//! * [`blowup`]: the prime blow-up lifting an `(r-1)`-coloring of `[M]` to an
//!   `r`-coloring of `[pM]`.
//! * [`oracle`]: exhaustive searches for `W(r,k)`, `aw([n],k)` and `H(k)`.
//! * [`chain`]: log-space evaluation of the full lower-bound chain for
//!   `H(k)^(1/k) / k`.
//! * [`certificate`] and [`pipeline`]: the end-to-end witness pipeline and
//!   its re-verifiable text format.

pub mod ap;
pub mod blowup;
pub mod certificate;
pub mod chain;
mod error;
pub mod lll;
pub mod oracle;
pub mod pipeline;
pub mod primes;

pub use ap::{Coloring, Progression};
pub use certificate::Certificate;
pub use chain::ChainReport;
pub use error::{Error, Result};
pub use primes::PrimeWindow;
