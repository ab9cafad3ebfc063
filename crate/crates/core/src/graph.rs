//! Geometric grid graphs with n-sector connectivity.
//!
//! Vertices sit on a lattice with spacing `grid_size`, numbered row-major
//! (`id = row * nx + col`). An n-sector vertex connects to every lattice
//! offset `(i, j) ≠ (0, 0)` with `max(|i|, |j|) ≤ n` and `gcd(|i|, |j|) = 1`,
//! i.e. one edge per distinct direction inside the Chebyshev radius.

use crate::error::{Error, Result};
use crate::geom::{heading_of, BBox, Vec2};

pub type VertexId = usize;

#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    positions: Vec<Vec2>,
    adjacency: Vec<Vec<VertexId>>,
    nx: usize,
    ny: usize,
    grid_size: f64,
    sectors: u32,
    region: BBox,
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Coprime lattice offsets within Chebyshev radius `sectors`, sorted by `(i, j)`.
pub fn sector_offsets(sectors: u32) -> Vec<(i64, i64)> {
    let r = sectors as i64;
    let mut out = Vec::new();
    for i in -r..=r {
        for j in -r..=r {
            if (i, j) != (0, 0) && gcd(i, j) == 1 {
                out.push((i, j));
            }
        }
    }
    out
}

impl Graph {
    pub fn build_grid(region: BBox, grid_size: f64, sectors: u32) -> Result<Graph> {
        if !(grid_size > 0.0 && grid_size.is_finite()) {
            return Err(Error::arg("grid_size must be positive"));
        }
        if !(1..=3).contains(&sectors) {
            return Err(Error::arg(format!("sectors must be 1, 2 or 3 (got {sectors})")));
        }
        let cells = |span: f64| (span / grid_size + 1e-9).floor() as usize;
        let (cx, cy) = (cells(region.width()), cells(region.height()));
        if cx < 2 || cy < 2 {
            return Err(Error::arg("region must span at least 2 grid cells per axis"));
        }
        let (nx, ny) = (cx + 1, cy + 1);
        let mut positions = Vec::with_capacity(nx * ny);
        for row in 0..ny {
            for col in 0..nx {
                positions.push(Vec2::new(
                    region.min.x + col as f64 * grid_size,
                    region.min.y + row as f64 * grid_size,
                ));
            }
        }
        let offsets = sector_offsets(sectors);
        let mut adjacency = Vec::with_capacity(nx * ny);
        for row in 0..ny as i64 {
            for col in 0..nx as i64 {
                let succ = offsets
                    .iter()
                    .filter_map(|&(i, j)| {
                        let (c, r) = (col + i, row + j);
                        (c >= 0 && r >= 0 && c < nx as i64 && r < ny as i64)
                            .then(|| r as usize * nx + c as usize)
                    })
                    .collect();
                adjacency.push(succ);
            }
        }
        Ok(Graph {
            positions,
            adjacency,
            nx,
            ny,
            grid_size,
            sectors,
            region,
        })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum()
    }

    pub fn position(&self, v: VertexId) -> Vec2 {
        self.positions[v]
    }

    pub fn successors(&self, v: VertexId) -> &[VertexId] {
        &self.adjacency[v]
    }

    pub fn grid_size(&self) -> f64 {
        self.grid_size
    }

    pub fn sectors(&self) -> u32 {
        self.sectors
    }

    pub fn region(&self) -> BBox {
        self.region
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    /// Shortest edge length; this is `grid_size` for every sector count.
    pub fn s_path_min(&self) -> f64 {
        self.grid_size
    }

    pub fn vertex_at(&self, col: usize, row: usize) -> Option<VertexId> {
        (col < self.nx && row < self.ny).then(|| row * self.nx + col)
    }

    /// Vertex nearest to `p`, if `p` lies inside the region.
    pub fn nearest_vertex(&self, p: &Vec2) -> Option<VertexId> {
        if !self.region.contains(p) {
            return None;
        }
        let col = ((p.x - self.region.min.x) / self.grid_size).round() as usize;
        let row = ((p.y - self.region.min.y) / self.grid_size).round() as usize;
        self.vertex_at(col.min(self.nx - 1), row.min(self.ny - 1))
    }

    pub fn is_adjacent(&self, u: VertexId, v: VertexId) -> bool {
        self.adjacency.get(u).is_some_and(|a| a.contains(&v))
    }

    /// Ground-track direction of edge `u → v` in `(-π, π]`.
    pub fn edge_direction(&self, u: VertexId, v: VertexId) -> Result<f64> {
        if !self.is_adjacent(u, v) {
            return Err(Error::arg(format!("{v} is not a successor of {u}")));
        }
        Ok(self.direction(u, v))
    }

    pub(crate) fn direction(&self, u: VertexId, v: VertexId) -> f64 {
        heading_of(&(self.positions[v] - self.positions[u]))
    }
}
