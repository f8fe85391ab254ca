use serde::{Deserialize, Serialize};

/// Closed-form test functions sampled onto grids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FieldFixture {
    Const(f64),
    /// `b . x`
    Linear(Vec<f64>),
    /// `height * e * exp(-1 / (1 - |x - c|^2 / r^2))` inside `B_r(c)`, so the
    /// peak value is `height`.
    Bump { center: Vec<f64>, radius: f64, height: f64 },
    /// `min(|x - c|^(-beta), clip)`.
    PowerSpike { center: Vec<f64>, beta: f64, clip: f64 },
    Product(Vec<FieldFixture>),
    Sum(Vec<FieldFixture>),
}

impl FieldFixture {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            FieldFixture::Const(c) => *c,
            FieldFixture::Linear(b) => b.iter().zip(x).map(|(b, x)| b * x).sum(),
            FieldFixture::Bump { center, radius, height } => {
                let s2: f64 =
                    x.iter().zip(center).map(|(a, c)| (a - c) * (a - c)).sum::<f64>() / (radius * radius);
                if s2 >= 1.0 {
                    0.0
                } else {
                    height * (1.0 - 1.0 / (1.0 - s2)).exp()
                }
            }
            FieldFixture::PowerSpike { center, beta, clip } => {
                let r: f64 = x.iter().zip(center).map(|(a, c)| (a - c) * (a - c)).sum::<f64>().sqrt();
                if r == 0.0 {
                    *clip
                } else {
                    r.powf(-beta).min(*clip)
                }
            }
            FieldFixture::Product(fs) => fs.iter().map(|f| f.eval(x)).product(),
            FieldFixture::Sum(fs) => fs.iter().map(|f| f.eval(x)).sum(),
        }
    }

    /// Dimension implied by the literal, if any.
    pub fn dim(&self) -> Option<usize> {
        match self {
            FieldFixture::Const(_) => None,
            FieldFixture::Linear(b) => Some(b.len()),
            FieldFixture::Bump { center, .. } | FieldFixture::PowerSpike { center, .. } => Some(center.len()),
            FieldFixture::Product(fs) | FieldFixture::Sum(fs) => fs.iter().find_map(|f| f.dim()),
        }
    }
}
