//! Converts EAD3 finding aids and a media inventory into a IIIF
//! Presentation 3 resource graph that mirrors the archival hierarchy
//! (fonds, series, subseries, files and items), and serves it over HTTP.

pub mod archival_model;
pub mod ead_io;
pub mod enrichment;
pub mod iiif_build;
pub mod iiif_serialize;
pub mod publisher;
pub mod cli;
