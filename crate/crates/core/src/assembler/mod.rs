//! Stacked matrix form of the followers' game, the leader box and the
//! single-level big-M export.

pub mod bigm;
pub mod epigraph;
pub mod game;
pub mod layout;
pub mod mps;
pub mod probe;
pub mod reduce;

pub use bigm::{build_bigm, export_bigm, read_bigm, BigM, ExportError};
pub use epigraph::{build_epigraph, Epigraph, EpigraphRow};
pub use game::{assemble, AssembledGame, LeaderPolytope};
pub use layout::{Block, Layout, RowTag};
pub use mps::{parse_mps, MpsModel};
pub use probe::{feasibility_probe, FeasibilityProbe, ProbeError};
pub use reduce::Reduction;
