pub mod assembler;
pub mod io;
pub mod lcp;
pub mod model;
pub mod mpec;
pub mod vgne;
