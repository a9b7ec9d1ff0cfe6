//! Uniform P1 meshes on [-1, 1] and [-1, 1]^2 with lumped nodal quadrature.

use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{Error, Result};

static NEXT_MESH_ID: AtomicU64 = AtomicU64::new(1);

/// Node layout of a structured mesh.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layout {
    /// `nodes` points on [-1, 1].
    Interval { nodes: usize },
    /// `nx * ny` grid points on [-1, 1]^2, row-major with x fastest.
    Square { nx: usize, ny: usize },
}

/// A uniform mesh. Node count and connectivity are fixed at construction.
#[derive(Debug, Clone)]
pub struct Mesh {
    id: u64,
    layout: Layout,
    h: f64,
    coords: Vec<[f64; 2]>,
    weights: Vec<f64>,
    triangles: Vec<[usize; 3]>,
}

impl Mesh {
    /// `elements` uniform intervals on [-1, 1].
    pub fn interval(elements: usize) -> Result<Self> {
        if elements < 1 {
            return Err(Error::InvalidParameter("1D mesh needs at least one element".into()));
        }
        let nodes = elements + 1;
        let h = 2.0 / elements as f64;
        let coords = (0..nodes).map(|i| [-1.0 + i as f64 * h, 0.0]).collect();
        let mut weights = vec![h; nodes];
        weights[0] = 0.5 * h;
        weights[nodes - 1] = 0.5 * h;
        Ok(Self {
            id: NEXT_MESH_ID.fetch_add(1, Ordering::Relaxed),
            layout: Layout::Interval { nodes },
            h,
            coords,
            weights,
            triangles: Vec::new(),
        })
    }

    /// `cells x cells` squares on [-1, 1]^2, each cut along its
    /// lower-left/upper-right diagonal into two triangles.
    pub fn square(cells: usize) -> Result<Self> {
        if cells < 1 {
            return Err(Error::InvalidParameter("2D mesh needs at least one cell".into()));
        }
        let n = cells + 1;
        let h = 2.0 / cells as f64;
        let mut coords = Vec::with_capacity(n * n);
        for j in 0..n {
            for i in 0..n {
                coords.push([-1.0 + i as f64 * h, -1.0 + j as f64 * h]);
            }
        }
        let idx = |i: usize, j: usize| j * n + i;
        let mut triangles = Vec::with_capacity(2 * cells * cells);
        for j in 0..cells {
            for i in 0..cells {
                triangles.push([idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)]);
                triangles.push([idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)]);
            }
        }
        // row sums of the consistent P1 mass matrix: area / 3 per vertex
        let area = 0.5 * h * h;
        let mut weights = vec![0.0; n * n];
        for t in &triangles {
            for &v in t {
                weights[v] += area / 3.0;
            }
        }
        Ok(Self {
            id: NEXT_MESH_ID.fetch_add(1, Ordering::Relaxed),
            layout: Layout::Square { nx: n, ny: n },
            h,
            coords,
            weights,
            triangles,
        })
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn dimension(&self) -> usize {
        match self.layout {
            Layout::Interval { .. } => 1,
            Layout::Square { .. } => 2,
        }
    }

    pub fn node_count(&self) -> usize {
        self.weights.len()
    }

    /// Number of elements: intervals in 1D, triangles in 2D.
    pub fn element_count(&self) -> usize {
        match self.layout {
            Layout::Interval { nodes } => nodes - 1,
            Layout::Square { .. } => self.triangles.len(),
        }
    }

    /// Uniform spacing of the underlying grid.
    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn coords(&self) -> &[[f64; 2]] {
        &self.coords
    }

    pub fn quad_weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    /// Measure of the domain: 2 in 1D, 4 in 2D.
    pub fn measure(&self) -> f64 {
        match self.layout {
            Layout::Interval { .. } => 2.0,
            Layout::Square { .. } => 4.0,
        }
    }

    pub(crate) fn check(&self, mesh_id: u64) -> Result<()> {
        if mesh_id == self.id {
            Ok(())
        } else {
            Err(Error::MeshMismatch {
                expected: self.id,
                found: mesh_id,
            })
        }
    }
}
