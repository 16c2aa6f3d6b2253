use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sample {
    pub n: usize,
    pub value: f64,
}

/// First-order Richardson extrapolation from resolutions `n1 < n2`:
/// `Q = Q₂ + (Q₂ − Q₁)/(r − 1)` with budget `|Q₂ − Q₁|·r/(r − 1)`, `r = n₂/n₁`.
pub fn richardson(n1: usize, q1: f64, n2: usize, q2: f64) -> (f64, f64) {
    let r = n2 as f64 / n1 as f64;
    let diff = q2 - q1;
    (q2 + diff / (r - 1.0), diff.abs() * r / (r - 1.0))
}

/// A scalar quantity tracked over resolutions, extrapolated from the two finest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Series {
    pub name: String,
    pub samples: Vec<Sample>,
    pub extrapolated: Option<f64>,
    pub budget: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub observed_order: Option<f64>,
}

impl Series {
    pub fn new(name: impl Into<String>, samples: Vec<Sample>) -> Self {
        let (extrapolated, budget) = match samples.as_slice() {
            [.., a, b] => {
                let (e, r) = richardson(a.n, a.value, b.n, b.value);
                (Some(e), Some(r))
            }
            _ => (None, None),
        };
        let mut s = Self {
            name: name.into(),
            samples,
            extrapolated,
            budget,
            observed_order: None,
        };
        s.observed_order = s.compute_order();
        s
    }

    pub fn finest(&self) -> Option<f64> {
        self.samples.last().map(|s| s.value)
    }

    /// Observed convergence order from the three finest samples.
    fn compute_order(&self) -> Option<f64> {
        match self.samples.as_slice() {
            [.., a, b, c] => {
                let (d1, d2) = ((b.value - a.value).abs(), (c.value - b.value).abs());
                // ratio of successive refinements, assumed geometric
                let r = (c.n as f64 / b.n as f64).ln();
                (d1 > 0.0 && d2 > 0.0).then(|| (d1 / d2).ln() / r)
            }
            _ => None,
        }
    }
}
