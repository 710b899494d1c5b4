//! Polygonal meshes: data model, generators, file I/O, star sub-triangulation and
//! shape-regularity diagnostics.

pub mod build;
pub mod generate;
pub mod io;
pub mod quality;
pub mod shrink;
pub mod subtri;
pub mod types;

pub use generate::{generate_hexagonal_mesh, generate_voronoi_mesh, random_seeds, voronoi_from_seeds};
pub use io::{load_mesh, mesh_to_string, parse_mesh, save_mesh};
pub use quality::{chebyshev_center, quality_report, MeshQualityReport};
pub use shrink::shrink_vertical_edges;
pub use subtri::{split_cell, subtriangulate, AffineMap, CellSplit, SubTriangulation};
pub use types::{signed_area, BoundaryTag, Edge, Point2, PolygonalMesh};
