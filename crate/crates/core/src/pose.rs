//! Planar pose belief propagated with a unicycle model along straight edges.

use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::linalg::{Cholesky, Matrix};

pub type Mat3 = [[f64; 3]; 3];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoseBelief {
    pub position: Point2,
    pub heading: f64,
    pub covariance: Mat3,
}

impl PoseBelief {
    pub fn new(position: Point2, heading: f64, covariance: Mat3) -> Result<Self> {
        let b = Self {
            position,
            heading,
            covariance,
        };
        b.validate()?;
        Ok(b)
    }

    /// Exactly known pose.
    pub fn certain(position: Point2, heading: f64) -> Self {
        Self {
            position,
            heading,
            covariance: [[0.0; 3]; 3],
        }
    }

    /// Pose with diagonal covariance given as standard deviations.
    pub fn with_std(position: Point2, heading: f64, std: [f64; 3]) -> Self {
        let mut covariance = [[0.0; 3]; 3];
        for i in 0..3 {
            covariance[i][i] = std[i] * std[i];
        }
        Self {
            position,
            heading,
            covariance,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let c = &self.covariance;
        for i in 0..3 {
            for j in 0..3 {
                if !c[i][j].is_finite() {
                    return Err(Error::InvalidParameter("pose covariance must be finite"));
                }
                if (c[i][j] - c[j][i]).abs() > 1e-12 {
                    return Err(Error::NotSymmetric);
                }
            }
        }
        let mut m = Matrix::from_fn(3, 3, |r, k| c[r][k]);
        m.add_diagonal(1e-15);
        Cholesky::new(&m).map(|_| ())
    }

    /// Covariance of the planar position.
    pub fn position_covariance(&self) -> [[f64; 2]; 2] {
        let c = &self.covariance;
        [[c[0][0], c[0][1]], [c[1][0], c[1][1]]]
    }

    pub fn determinant(&self) -> f64 {
        det3(&self.covariance)
    }
}

pub fn det3(m: &Mat3) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Additive process noise, diagonal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotionNoise {
    pub variances: [f64; 3],
}

impl MotionNoise {
    pub fn from_std(std: [f64; 3]) -> Self {
        Self {
            variances: [std[0] * std[0], std[1] * std[1], std[2] * std[2]],
        }
    }

    pub fn zero() -> Self {
        Self { variances: [0.0; 3] }
    }
}

impl Default for MotionNoise {
    fn default() -> Self {
        Self::from_std([0.1, 0.1, 0.0026])
    }
}

/// Jacobian of the unicycle step `(d, θ_new)` with respect to the state.
pub fn motion_jacobian(distance: f64, new_heading: f64) -> Mat3 {
    [
        [1.0, 0.0, -distance * libm::sin(new_heading)],
        [0.0, 1.0, distance * libm::cos(new_heading)],
        [0.0, 0.0, 1.0],
    ]
}

/// Move along the edge `from -> to`, turning to face the edge first.
pub fn propagate(belief: &PoseBelief, from: Point2, to: Point2, noise: &MotionNoise) -> PoseBelief {
    let delta = to - from;
    let distance = delta.norm();
    let mut cov = belief.covariance;
    let heading = if distance > 0.0 {
        let heading = libm::atan2(delta.y, delta.x);
        let f = motion_jacobian(distance, heading);
        let mut fs = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                fs[i][j] = (0..3).map(|k| f[i][k] * cov[k][j]).sum();
            }
        }
        for i in 0..3 {
            for j in 0..3 {
                cov[i][j] = (0..3).map(|k| fs[i][k] * f[j][k]).sum();
            }
        }
        heading
    } else {
        belief.heading
    };
    for i in 0..3 {
        cov[i][i] += noise.variances[i];
    }
    for i in 0..3 {
        for j in (i + 1)..3 {
            let m = 0.5 * (cov[i][j] + cov[j][i]);
            cov[i][j] = m;
            cov[j][i] = m;
        }
    }
    PoseBelief {
        position: Point2::new(belief.position.x + delta.x, belief.position.y + delta.y),
        heading,
        covariance: cov,
    }
}
