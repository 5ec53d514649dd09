use std::sync::Arc;

use super::{AbstractSimplex, Geom, SimplicialSet};
use crate::chain::{ChainError, ChainResult};

/// `Sⁿ` with one vertex and one nondegenerate `n`-simplex.
#[derive(Debug)]
pub struct Sphere {
    n: u32,
}

pub fn sphere(n: u32) -> ChainResult<Arc<Sphere>> {
    if n == 0 {
        return Err(ChainError::Invalid("S^0 has two vertices and is not supported".into()));
    }
    Ok(Arc::new(Sphere { n }))
}

impl SimplicialSet for Sphere {
    fn label(&self) -> String {
        format!("S^{}", self.n)
    }

    fn face_geom(&self, _i: usize, x: &Geom) -> AbstractSimplex {
        match x {
            Geom::Cell { dim, .. } if *dim == self.n => self.base_simplex(self.n as usize - 1),
            _ => panic!("{x:?} has no faces in {}", self.label()),
        }
    }

    fn nondegenerate(&self, k: usize) -> Option<Arc<Vec<Geom>>> {
        let v = if k == 0 {
            vec![self.base_point()]
        } else if k == self.n as usize {
            vec![Geom::Cell { dim: self.n, id: 0 }]
        } else {
            Vec::new()
        };
        Some(Arc::new(v))
    }

    fn base_point(&self) -> Geom {
        Geom::Cell { dim: 0, id: 0 }
    }
}
