//! Radially layered scattering media.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Contrast `|n(a) - 1|` below which a medium is rejected as near-critical.
pub const CRITICAL_CONTRAST: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Dimension {
    Two,
    Three,
}

impl Dimension {
    pub fn from_int(d: u32) -> Result<Self> {
        match d {
            2 => Ok(Dimension::Two),
            3 => Ok(Dimension::Three),
            _ => Err(Error::InvalidMedium(format!(
                "dimension must be 2 or 3, got {d}"
            ))),
        }
    }

    pub fn as_int(self) -> u32 {
        match self {
            Dimension::Two => 2,
            Dimension::Three => 3,
        }
    }

    pub fn as_f64(self) -> f64 {
        self.as_int() as f64
    }

    /// Volume of the unit ball.
    pub fn unit_ball_volume(self) -> f64 {
        match self {
            Dimension::Two => PI,
            Dimension::Three => 4.0 * PI / 3.0,
        }
    }

    /// Number of independent angular harmonics of order `l`.
    pub fn multiplicity(self, l: u32) -> u32 {
        match (self, l) {
            (Dimension::Two, 0) => 1,
            (Dimension::Two, _) => 2,
            (Dimension::Three, l) => 2 * l + 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryCondition {
    Dirichlet,
    Neumann,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    /// Outer radius of the layer.
    pub r: f64,
    pub n: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Obstacle {
    pub r: f64,
    pub bc: BoundaryCondition,
}

/// The JSON form of a medium.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MediumConfig {
    pub dimension: u32,
    pub outer_radius: f64,
    pub layers: Vec<Layer>,
    #[serde(default)]
    pub obstacle: Option<Obstacle>,
    #[serde(default = "default_t")]
    pub t: f64,
}

fn default_t() -> f64 {
    1.0
}

/// `sign(n(a) - 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundarySign {
    pub sigma: i32,
}

/// A ball of radius `a` with piecewise-constant index and an optional
/// concentric obstacle.
///
/// Construction checks the structural invariants only; [`RadialMedium::validate`]
/// additionally rejects media without boundary contrast.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialMedium {
    dim: Dimension,
    a: f64,
    layers: Vec<Layer>,
    obstacle: Option<Obstacle>,
}

impl RadialMedium {
    pub fn new(
        dim: Dimension,
        outer_radius: f64,
        layers: Vec<Layer>,
        obstacle: Option<Obstacle>,
    ) -> Result<Self> {
        let a = outer_radius;
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::InvalidMedium(format!(
                "outer radius {a} must be positive"
            )));
        }
        let Some(last) = layers.last() else {
            return Err(Error::InvalidMedium("no layers".into()));
        };
        if (last.r - a).abs() > 1e-12 * a {
            return Err(Error::InvalidMedium(format!(
                "outermost layer radius {} differs from the outer radius {a}",
                last.r
            )));
        }
        let mut prev = 0.0;
        for layer in &layers {
            if !(layer.r > prev) || !layer.r.is_finite() {
                return Err(Error::InvalidMedium(format!(
                    "layer radii must be strictly increasing ({} after {prev})",
                    layer.r
                )));
            }
            if !(layer.n > 0.0 && layer.n.is_finite()) {
                return Err(Error::InvalidMedium(format!(
                    "refractive index {} must be positive",
                    layer.n
                )));
            }
            prev = layer.r;
        }
        let mut layers = layers;
        layers.last_mut().unwrap().r = a;
        if let Some(obs) = obstacle {
            if !(obs.r > 0.0 && obs.r < layers[0].r) {
                return Err(Error::InvalidMedium(format!(
                    "obstacle radius {} must lie in (0, {})",
                    obs.r, layers[0].r
                )));
            }
        }
        Ok(RadialMedium {
            dim,
            a,
            layers,
            obstacle,
        })
    }

    /// Homogeneous ball or disk of radius `a`.
    pub fn homogeneous(dim: Dimension, a: f64, n: f64) -> Result<Self> {
        Self::new(dim, a, vec![Layer { r: a, n }], None)
    }

    pub fn from_config(cfg: &MediumConfig) -> Result<Self> {
        Self::new(
            Dimension::from_int(cfg.dimension)?,
            cfg.outer_radius,
            cfg.layers.clone(),
            cfg.obstacle,
        )
    }

    pub fn to_config(&self, t: f64) -> MediumConfig {
        MediumConfig {
            dimension: self.dim.as_int(),
            outer_radius: self.a,
            layers: self.layers.clone(),
            obstacle: self.obstacle,
            t,
        }
    }

    /// Rejects media whose boundary contrast vanishes.
    pub fn validate(self) -> Result<Self> {
        if self.obstacle.is_none() && self.layers.iter().all(|l| l.n == 1.0) {
            return Err(Error::DegenerateMedium);
        }
        let contrast = (self.boundary_index() - 1.0).abs();
        if contrast < CRITICAL_CONTRAST {
            return Err(Error::NearCritical(contrast));
        }
        Ok(self)
    }

    pub fn dimension(&self) -> Dimension {
        self.dim
    }

    pub fn outer_radius(&self) -> f64 {
        self.a
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn obstacle(&self) -> Option<Obstacle> {
        self.obstacle
    }

    /// Inner radius of the propagating region: the obstacle radius or zero.
    pub fn inner_radius(&self) -> f64 {
        self.obstacle.map_or(0.0, |o| o.r)
    }

    pub fn boundary_index(&self) -> f64 {
        self.layers.last().unwrap().n
    }

    pub fn n_max(&self) -> f64 {
        self.layers.iter().map(|l| l.n).fold(0.0, f64::max)
    }

    /// `n(r)`; the value at an interface is that of the inner layer.
    pub fn index_at(&self, r: f64) -> f64 {
        self.layers
            .iter()
            .find(|l| r <= l.r)
            .unwrap_or_else(|| self.layers.last().unwrap())
            .n
    }

    /// `(inner, outer, n)` for each layer, the first one starting at the obstacle.
    pub fn shells(&self) -> Vec<(f64, f64, f64)> {
        let mut lo = self.inner_radius();
        self.layers
            .iter()
            .map(|l| {
                let s = (lo, l.r, l.n);
                lo = l.r;
                s
            })
            .collect()
    }

    pub fn boundary_sign(&self) -> BoundarySign {
        let sigma = if self.boundary_index() > 1.0 { 1 } else { -1 };
        BoundarySign { sigma }
    }

    /// `Vol(O) - integral of n^{d/2}` over the region outside the obstacle.
    pub fn gamma(&self) -> Result<f64> {
        let g = self.gamma_unchecked();
        let vol = self.dim.unit_ball_volume() * self.a.powf(self.dim.as_f64());
        if g.abs() < 1e-12 * vol {
            return Err(Error::GammaZero(g));
        }
        Ok(g)
    }

    fn gamma_unchecked(&self) -> f64 {
        let d = self.dim.as_f64();
        let w = self.dim.unit_ball_volume();
        let filled: f64 = self
            .shells()
            .iter()
            .map(|&(lo, hi, n)| n.powf(0.5 * d) * w * (hi.powf(d) - lo.powf(d)))
            .sum();
        w * self.a.powf(d) - filled
    }

    /// Same medium with every length scaled by `c`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(
            self.dim,
            self.a * c,
            self.layers
                .iter()
                .map(|l| Layer { r: l.r * c, n: l.n })
                .collect(),
            self.obstacle.map(|o| Obstacle { r: o.r * c, ..o }),
        )
    }

    /// Default eigenvalue scan step: about half the asymptotic spacing of
    /// radial eigenvalues.
    pub fn default_grid_step(&self) -> f64 {
        PI * PI / (8.0 * self.a * self.a * self.n_max().max(1.0))
    }

    /// Number of modes that can carry spectral events below `lambda_max`.
    pub fn mode_cap(&self, lambda_max: f64) -> u32 {
        let reach = lambda_max.max(0.0).sqrt() * self.a * self.n_max().max(1.0).sqrt();
        reach.ceil() as u32 + 20
    }
}
