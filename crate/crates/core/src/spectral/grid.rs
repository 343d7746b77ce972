use crate::error::{Error, Result};

/// Tensor grid on `(0,T) × [−L,L]` with open uniform time nodes
/// `t_k = (k+½)T/Nt` and closed uniform space nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeGrid {
    horizon: f64,
    half_length: f64,
    t_nodes: Vec<f64>,
    x_nodes: Vec<f64>,
}

impl SpaceTimeGrid {
    pub fn new(horizon: f64, half_length: f64, nt: usize, nx: usize) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::Domain(format!("horizon must be positive, got {horizon}")));
        }
        if !(half_length > 0.0 && half_length.is_finite()) {
            return Err(Error::Domain(format!("half-length must be positive, got {half_length}")));
        }
        if nt < 1 || nx < 2 {
            return Err(Error::Domain(format!("grid needs nt ≥ 1 and nx ≥ 2, got {nt}×{nx}")));
        }
        let dt = horizon / nt as f64;
        let t_nodes = (0..nt).map(|k| (k as f64 + 0.5) * dt).collect();
        let h = 2.0 * half_length / (nx - 1) as f64;
        let mut x_nodes: Vec<f64> = (0..nx).map(|j| -half_length + j as f64 * h).collect();
        x_nodes[nx - 1] = half_length;
        Ok(Self {
            horizon,
            half_length,
            t_nodes,
            x_nodes,
        })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    pub fn t_nodes(&self) -> &[f64] {
        &self.t_nodes
    }

    pub fn x_nodes(&self) -> &[f64] {
        &self.x_nodes
    }

    pub fn nt(&self) -> usize {
        self.t_nodes.len()
    }

    pub fn nx(&self) -> usize {
        self.x_nodes.len()
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.nt() as f64
    }

    /// The x nodes without the right endpoint, i.e. one period of a uniform
    /// periodic grid.
    pub fn periodic_x_nodes(&self) -> &[f64] {
        &self.x_nodes[..self.nx() - 1]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout() {
        let g = SpaceTimeGrid::new(2.0, 1.0, 4, 5).unwrap();
        assert_eq!(g.t_nodes(), &[0.25, 0.75, 1.25, 1.75]);
        assert_eq!(g.x_nodes(), &[-1.0, -0.5, 0.0, 0.5, 1.0]);
        assert!(SpaceTimeGrid::new(0.0, 1.0, 4, 5).is_err());
        assert!(SpaceTimeGrid::new(1.0, 1.0, 4, 1).is_err());
    }

    #[test]
    fn endpoints_are_exact() {
        let g = SpaceTimeGrid::new(1.0, std::f64::consts::PI, 3, 97).unwrap();
        assert_eq!(g.x_nodes()[0], -std::f64::consts::PI);
        assert_eq!(*g.x_nodes().last().unwrap(), std::f64::consts::PI);
        assert!(g.t_nodes().windows(2).all(|w| w[0] < w[1]));
    }
}
