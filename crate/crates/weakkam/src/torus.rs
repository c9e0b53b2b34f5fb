//! Points on the flat torus T^d = R^d / Z^d.

use serde::{Deserialize, Serialize};

/// Wrap a coordinate into the canonical representative [0, 1).
pub fn wrap(x: f64) -> f64 {
    let w = x - x.floor();
    // x.floor() of a tiny negative number can leave w == 1.0
    if w >= 1.0 {
        w - 1.0
    } else {
        w
    }
}

/// Minimal-image distance between two coordinates on T^1.
pub fn circle_dist(a: f64, b: f64) -> f64 {
    let d = (wrap(a) - wrap(b)).abs();
    d.min(1.0 - d)
}

/// A point of T^d stored by its canonical representative in [0,1)^d.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorusPoint {
    coords: Vec<f64>,
}

impl TorusPoint {
    pub fn new(coords: Vec<f64>) -> Self {
        TorusPoint { coords: coords.into_iter().map(wrap).collect() }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// d(x, y) = min over integer shifts of the Euclidean distance.
    pub fn dist(&self, other: &TorusPoint) -> f64 {
        assert_eq!(self.dim(), other.dim());
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| {
                let d = circle_dist(*a, *b);
                d * d
            })
            .sum::<f64>()
            .sqrt()
    }
}

impl From<f64> for TorusPoint {
    fn from(x: f64) -> Self {
        TorusPoint::new(vec![x])
    }
}

/// Distance in phase space T^d x R^d with minimal-image base distance.
pub fn phase_dist(x1: &TorusPoint, v1: &[f64], x2: &TorusPoint, v2: &[f64]) -> f64 {
    let db = x1.dist(x2);
    let dv: f64 = v1.iter().zip(v2).map(|(a, b)| (a - b) * (a - b)).sum();
    (db * db + dv).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_representative() {
        let p = TorusPoint::new(vec![1.25, -0.25, 3.0]);
        assert_eq!(p.coords(), &[0.25, 0.75, 0.0]);
        // tiny negative stays in [0,1)
        let q = TorusPoint::new(vec![-1e-18]);
        assert!(q.coords()[0] >= 0.0 && q.coords()[0] < 1.0);
    }

    #[test]
    fn minimal_image_distance() {
        let a = TorusPoint::new(vec![0.1]);
        let b = TorusPoint::new(vec![0.9]);
        assert!((a.dist(&b) - 0.2).abs() < 1e-15);
        let a = TorusPoint::new(vec![0.1, 0.1]);
        let b = TorusPoint::new(vec![0.9, 0.2]);
        assert!((a.dist(&b) - (0.04f64 + 0.01).sqrt()).abs() < 1e-15);
    }
}
