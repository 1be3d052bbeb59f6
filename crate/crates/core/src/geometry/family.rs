//! The two curved families and their product-of-trig embeddings.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{bessel_i_scaled, bessel_k_scaled};

/// Margin (radians) below which a vanishing sine/sinh is treated as a
/// coordinate singularity.
pub const SINGULARITY_MARGIN: f64 = 1e-6;

/// Which model a [`CurvedFamily`] is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    /// von Mises–Fisher on the unit sphere `S^m`.
    #[serde(alias = "vMF", alias = "vonmisesfisher")]
    Vmf,
    /// Exponential-type distribution on the unit hyperboloid `H^m`.
    Hyperboloid,
}

impl Model {
    pub fn name(self) -> &'static str {
        match self {
            Model::Vmf => "vmf",
            Model::Hyperboloid => "hyperboloid",
        }
    }
}

impl std::str::FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "vmf" | "von-mises-fisher" | "vonmisesfisher" => Ok(Model::Vmf),
            "hyperboloid" | "hyp" => Ok(Model::Hyperboloid),
            other => Err(Error::Config(format!("unknown model `{other}`"))),
        }
    }
}

impl std::fmt::Display for Model {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Angular coordinates `u = (u¹, …, u^m)` of a point on the model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct UCoord(pub Vec<f64>);

impl UCoord {
    pub fn new(u: Vec<f64>) -> Self {
        Self(u)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for UCoord {
    fn from(u: Vec<f64>) -> Self {
        Self(u)
    }
}

impl std::ops::Index<usize> for UCoord {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// One trig factor of an embedding component.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Factor {
    Cos,
    Sin,
    Cosh,
    Sinh,
}

impl Factor {
    /// `k`-th derivative at `x`.
    pub(crate) fn eval(self, k: usize, x: f64) -> f64 {
        match self {
            Factor::Cos => match k % 4 {
                0 => x.cos(),
                1 => -x.sin(),
                2 => -x.cos(),
                _ => x.sin(),
            },
            Factor::Sin => match k % 4 {
                0 => x.sin(),
                1 => x.cos(),
                2 => -x.sin(),
                _ => -x.cos(),
            },
            Factor::Cosh => {
                if k % 2 == 0 {
                    x.cosh()
                } else {
                    x.sinh()
                }
            }
            Factor::Sinh => {
                if k % 2 == 0 {
                    x.sinh()
                } else {
                    x.cosh()
                }
            }
        }
    }
}

/// A concrete `(m+1, m)`-curved exponential family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvedFamily {
    pub model: Model,
    pub m: usize,
    pub r: f64,
    pub r_dagger: f64,
}

impl CurvedFamily {
    pub fn new(model: Model, m: usize, r: f64) -> Result<Self> {
        if m < 2 || m > 8 {
            return Err(Error::Domain(format!("manifold dimension must be in 2..=8, got {m}")));
        }
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::Domain(format!("concentration must be positive, got {r}")));
        }
        let lo = 0.5 * (m as f64 - 1.0);
        let r_dagger = match model {
            Model::Vmf => bessel_i_scaled(lo + 1.0, r)? / bessel_i_scaled(lo, r)?,
            Model::Hyperboloid => bessel_k_scaled(lo + 1.0, r)? / bessel_k_scaled(lo, r)?,
        };
        Ok(Self { model, m, r, r_dagger })
    }

    pub fn vmf(m: usize, r: f64) -> Result<Self> {
        Self::new(Model::Vmf, m, r)
    }

    pub fn hyperboloid(m: usize, r: f64) -> Result<Self> {
        Self::new(Model::Hyperboloid, m, r)
    }

    /// Ambient dimension `n = m + 1`.
    pub fn n(&self) -> usize {
        self.m + 1
    }

    /// Sign pattern relating `θ = r·(σ ⊙ ξ)`.
    pub(crate) fn theta_sign(&self, i: usize) -> f64 {
        match (self.model, i) {
            (Model::Hyperboloid, 0) => -1.0,
            _ => 1.0,
        }
    }

    /// Quadratic form defining the model: `+1` everywhere on the sphere,
    /// Minkowski `(+, −, …, −)` on the hyperboloid.
    pub fn form_sign(&self, i: usize) -> f64 {
        match (self.model, i) {
            (Model::Hyperboloid, i) if i > 0 => -1.0,
            _ => 1.0,
        }
    }

    /// `x·y` under the model's quadratic form.
    pub fn form(&self, x: &[f64], y: &[f64]) -> f64 {
        x.iter()
            .zip(y)
            .enumerate()
            .map(|(i, (a, b))| self.form_sign(i) * a * b)
            .sum()
    }

    pub(crate) fn check_dim(&self, u: &UCoord) -> Result<()> {
        if u.dim() != self.m {
            return Err(Error::Domain(format!(
                "coordinate has dimension {}, family has m = {}",
                u.dim(),
                self.m
            )));
        }
        if u.0.iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain(format!("non-finite coordinate {:?}", u.0)));
        }
        Ok(())
    }

    /// Checks the declared coordinate ranges.
    pub fn check_range(&self, u: &UCoord) -> Result<()> {
        self.check_dim(u)?;
        let pi = std::f64::consts::PI;
        let first_polar = match self.model {
            Model::Vmf => 0,
            Model::Hyperboloid => 1,
        };
        for a in first_polar..self.m - 1 {
            if !(0.0..=pi).contains(&u[a]) {
                return Err(Error::Domain(format!("polar coordinate u{} = {} outside [0, π]", a + 1, u[a])));
            }
        }
        let last = u[self.m - 1];
        if self.m - 1 >= first_polar && !(0.0..2.0 * pi).contains(&last) {
            return Err(Error::Domain(format!("azimuth u{} = {last} outside [0, 2π)", self.m)));
        }
        Ok(())
    }

    /// Errors when a factor of the gauge `ν(u)` is within the margin of zero.
    pub fn check_regular(&self, u: &UCoord) -> Result<()> {
        self.check_dim(u)?;
        for a in 0..self.m {
            let v = match (self.model, a) {
                (Model::Hyperboloid, 0) => u[0].sinh(),
                _ => u[a].sin(),
            };
            if v.abs() < SINGULARITY_MARGIN {
                return Err(Error::Singular(format!("u{} = {} is a coordinate singularity", a + 1, u[a])));
            }
        }
        Ok(())
    }

    /// Trig factor of component `i` in coordinate `a` (`None` if absent).
    pub(crate) fn factor(&self, i: usize, a: usize) -> Option<Factor> {
        let hyp = self.model == Model::Hyperboloid && a == 0;
        if a < i {
            Some(if hyp { Factor::Sinh } else { Factor::Sin })
        } else if a == i && i < self.m {
            Some(if hyp { Factor::Cosh } else { Factor::Cos })
        } else {
            None
        }
    }

    /// Mixed partial derivative of direction component `ξ_i` with the given
    /// derivative order per coordinate.
    pub(crate) fn xi_partial(&self, i: usize, orders: &[usize], u: &[f64]) -> f64 {
        let mut prod = 1.0;
        for a in 0..self.m {
            match self.factor(i, a) {
                Some(f) => prod *= f.eval(orders[a], u[a]),
                None => {
                    if orders[a] > 0 {
                        return 0.0;
                    }
                }
            }
        }
        prod
    }

    /// Mean direction `ξ(u)` on the sphere or hyperboloid.
    pub fn direction(&self, u: &UCoord) -> Result<Vec<f64>> {
        self.check_dim(u)?;
        let zero = vec![0; self.m];
        Ok((0..self.n()).map(|i| self.xi_partial(i, &zero, &u.0)).collect())
    }

    /// `∂^{orders} θ(u)` as an n-vector.
    pub(crate) fn theta_partial(&self, orders: &[usize], u: &[f64]) -> Vec<f64> {
        (0..self.n())
            .map(|i| self.r * self.theta_sign(i) * self.xi_partial(i, orders, u))
            .collect()
    }

    /// `∂^{orders} η(u)` as an n-vector.
    pub(crate) fn eta_partial(&self, orders: &[usize], u: &[f64]) -> Vec<f64> {
        (0..self.n())
            .map(|i| self.r_dagger * self.xi_partial(i, orders, u))
            .collect()
    }

    /// Multi-index helper: derivative orders for the listed coordinates.
    pub(crate) fn orders(&self, coords: &[usize]) -> Vec<usize> {
        let mut o = vec![0; self.m];
        for &a in coords {
            o[a] += 1;
        }
        o
    }

    /// Bias constant `c(u)` of the stopping rule (independent of `u` here).
    pub fn bias_c(&self) -> f64 {
        let m = self.m as f64;
        let rr = self.r * self.r_dagger;
        let inv2 = 1.0 / (self.r_dagger * self.r_dagger);
        match self.model {
            Model::Vmf => -0.5 * (m / rr - inv2),
            Model::Hyperboloid => -0.5 * (-m / rr - inv2),
        }
    }

    /// Closed-form Fisher metric (diagonal in these coordinates).
    pub fn metric_diagonal(&self, u: &UCoord) -> Result<Vec<f64>> {
        self.check_dim(u)?;
        let rr = self.r * self.r_dagger;
        let mut out = Vec::with_capacity(self.m);
        let mut prod = 1.0;
        for a in 0..self.m {
            out.push(rr * prod);
            let f = match (self.model, a) {
                (Model::Hyperboloid, 0) => u[0].sinh(),
                _ => u[a].sin(),
            };
            prod *= f * f;
        }
        Ok(out)
    }
}
