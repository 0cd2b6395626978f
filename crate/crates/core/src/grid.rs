//! Uniform node sets in 1D and 2D with pinned-node masks.
//!
//! Pinned nodes hold the exact solution and are never updated. Pinning
//! covers the boundary nodes plus one layer of their neighbors, so every
//! free node sees a full reconstruction stencil.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary1D {
    /// Nodes `0, 1, n-2, n-1` hold exact values.
    Pinned,
    /// Indices wrap around; every node is free.
    Periodic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid1D {
    n: usize,
    h: f64,
    x0: f64,
    boundary: Boundary1D,
}

impl Grid1D {
    pub const MIN_NODES: usize = 7;

    /// `n` nodes on `[0, 1]`, `h = 1/(n-1)`.
    pub fn unit(n: usize) -> Result<Self> {
        if n < Self::MIN_NODES {
            return Err(Error::Config(format!(
                "1D grid needs at least {} nodes, got {n}",
                Self::MIN_NODES
            )));
        }
        Ok(Self {
            n,
            h: 1.0 / (n - 1) as f64,
            x0: 0.0,
            boundary: Boundary1D::Pinned,
        })
    }

    /// `n` nodes on the periodic unit interval, `h = 1/n`.
    pub fn periodic(n: usize) -> Result<Self> {
        if n < 4 {
            return Err(Error::Config(format!(
                "periodic grid needs at least 4 nodes, got {n}"
            )));
        }
        Ok(Self {
            n,
            h: 1.0 / n as f64,
            x0: 0.0,
            boundary: Boundary1D::Periodic,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn boundary(&self) -> Boundary1D {
        self.boundary
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.h
    }

    pub fn coordinates(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    pub fn is_pinned(&self, i: usize) -> bool {
        match self.boundary {
            Boundary1D::Pinned => i < 2 || i + 2 >= self.n,
            Boundary1D::Periodic => false,
        }
    }

    pub fn free_nodes(&self) -> Vec<usize> {
        (0..self.n).filter(|&i| !self.is_pinned(i)).collect()
    }
}

/// Square-cell Cartesian grid, node `(i, j)` stored at `j * nx + i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid2D {
    nx: usize,
    ny: usize,
    h: f64,
    x0: f64,
    y0: f64,
}

impl Grid2D {
    pub const MIN_NODES: usize = 5;

    /// `n x n` nodes on `[lo, hi]^2`.
    pub fn square(n: usize, lo: f64, hi: f64) -> Result<Self> {
        if n < Self::MIN_NODES {
            return Err(Error::Config(format!(
                "2D grid needs at least {} nodes per direction, got {n}",
                Self::MIN_NODES
            )));
        }
        if !(hi > lo) {
            return Err(Error::Config(format!("empty domain [{lo}, {hi}]")));
        }
        Ok(Self {
            nx: n,
            ny: n,
            h: (hi - lo) / (n - 1) as f64,
            x0: lo,
            y0: lo,
        })
    }

    /// `nx x ny` nodes with spacing `h` from `(x0, y0)`.
    pub fn with_spacing(nx: usize, ny: usize, h: f64, x0: f64, y0: f64) -> Result<Self> {
        if nx < Self::MIN_NODES || ny < Self::MIN_NODES {
            return Err(Error::Config(format!(
                "2D grid needs at least {} nodes per direction, got {nx} x {ny}",
                Self::MIN_NODES
            )));
        }
        if !(h > 0.0) {
            return Err(Error::Config(format!("non-positive spacing {h}")));
        }
        Ok(Self { nx, ny, h, x0, y0 })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn ij(&self, idx: usize) -> (usize, usize) {
        (idx % self.nx, idx / self.nx)
    }

    pub fn xy(&self, i: usize, j: usize) -> [f64; 2] {
        [self.x0 + i as f64 * self.h, self.y0 + j as f64 * self.h]
    }

    pub fn is_pinned(&self, i: usize, j: usize) -> bool {
        i < 2 || j < 2 || i + 2 >= self.nx || j + 2 >= self.ny
    }

    pub fn pinned_mask(&self) -> Vec<bool> {
        (0..self.len())
            .map(|idx| {
                let (i, j) = self.ij(idx);
                self.is_pinned(i, j)
            })
            .collect()
    }

    pub fn free_nodes(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&idx| {
                let (i, j) = self.ij(idx);
                !self.is_pinned(i, j)
            })
            .collect()
    }

    pub fn pinned_nodes(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&idx| {
                let (i, j) = self.ij(idx);
                self.is_pinned(i, j)
            })
            .collect()
    }
}
