//! Exact probability on finite spaces: spaces, distributions, Markov
//! kernels, composition, joints and marginals. All arithmetic is in
//! arbitrary-precision rationals so equalities hold exactly.

mod dist;
mod kernel;
mod product;
mod space;

pub use dist::{rat, Dist};
pub use kernel::{compose, pushforward, Kernel};
pub use product::{graph, identity_tensor, marginal_via_projection, Event, Joint, ProductSpace};
pub use space::{FiniteSpace, TUPLE_SEPARATOR};
