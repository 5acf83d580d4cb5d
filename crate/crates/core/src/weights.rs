//! Weight families evaluated in log-space on a node set, and the dual
//! (hole) weights.

use std::fmt;
use std::sync::Arc;

use rug::Float;

use crate::error::{Error, Result};
use crate::mp::{ln_binomial, ln_gamma};
use crate::nodes::{NodeSet, RealFn};

/// A field `V_N = V + γ/N + η/N²` given directly.
#[derive(Clone)]
pub struct GenericField {
    pub v: RealFn,
    pub gamma: f64,
    pub eta: Option<RealFn>,
}

#[derive(Clone)]
pub enum WeightSpec {
    Krawtchouk { p: f64, q: f64 },
    Hahn { alpha: f64, beta: f64 },
    AssociatedHahn { alpha: f64, beta: f64 },
    GenericField(GenericField),
}

impl fmt::Debug for WeightSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightSpec::Krawtchouk { p, q } => write!(f, "Krawtchouk(p={p}, q={q})"),
            WeightSpec::Hahn { alpha, beta } => write!(f, "Hahn(alpha={alpha}, beta={beta})"),
            WeightSpec::AssociatedHahn { alpha, beta } => {
                write!(f, "AssociatedHahn(alpha={alpha}, beta={beta})")
            }
            WeightSpec::GenericField(g) => write!(f, "GenericField(gamma={})", g.gamma),
        }
    }
}

fn xlogx(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

impl WeightSpec {
    pub fn krawtchouk(p: f64) -> Self {
        WeightSpec::Krawtchouk { p, q: 1.0 - p }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        match *self {
            WeightSpec::Krawtchouk { p, q } => {
                if !ok(p) || !ok(q) || (p + q - 1.0).abs() > 1e-14 {
                    return Err(Error::config(format!(
                        "Krawtchouk needs p, q > 0 with p + q = 1 (got p={p}, q={q})"
                    )));
                }
            }
            WeightSpec::Hahn { alpha, beta } | WeightSpec::AssociatedHahn { alpha, beta } => {
                if !ok(alpha) || !ok(beta) {
                    return Err(Error::config(format!(
                        "Hahn parameters must be positive (got alpha={alpha}, beta={beta})"
                    )));
                }
            }
            WeightSpec::GenericField(ref g) => {
                if !g.gamma.is_finite() {
                    return Err(Error::config("gamma must be finite"));
                }
            }
        }
        Ok(())
    }

    /// The leading-order field V on (0,1) for `n` nodes, normalized so
    /// that log w_j + N V(x_j) + Σ_{n≠j} log|x_j − x_n| is constant up to
    /// O(1/N). For the Hahn families the parameters enter through
    /// (α−1)/N and (β−1)/N, the offsets that make Stirling's formula
    /// centered at the nodes.
    pub fn potential(&self, n: usize) -> RealFn {
        let nf = n as f64;
        match self.clone() {
            WeightSpec::Krawtchouk { p, q } => {
                let s = (q / p).ln();
                Arc::new(move |x: f64| x * s)
            }
            WeightSpec::Hahn { alpha, beta } => {
                let (a, b) = ((alpha - 1.0) / nf, (beta - 1.0) / nf);
                Arc::new(move |x: f64| -xlogx(x + a) - xlogx(1.0 - x + b))
            }
            WeightSpec::AssociatedHahn { alpha, beta } => {
                let (a, b) = ((alpha - 1.0) / nf, (beta - 1.0) / nf);
                Arc::new(move |x: f64| xlogx(x + a) + xlogx(1.0 - x + b))
            }
            WeightSpec::GenericField(g) => g.v,
        }
    }

    fn classical_logw(&self, n: usize) -> Vec<f64> {
        let nf = n as f64;
        let base = (nf - 1.0) * nf.ln() - ln_gamma(nf);
        match *self {
            WeightSpec::Krawtchouk { p, q } => {
                let pre = base + 0.5 * (p * q).ln() - nf * q.ln();
                (0..n)
                    .map(|j| {
                        let jf = j as f64;
                        pre + ln_binomial(nf - 1.0, jf) + jf * p.ln() + (nf - 1.0 - jf) * q.ln()
                    })
                    .collect()
            }
            WeightSpec::Hahn { alpha, beta } => {
                let norm = ln_binomial(nf + beta - 2.0, beta - 1.0);
                (0..n)
                    .map(|j| {
                        let jf = j as f64;
                        base + ln_binomial(jf + alpha - 1.0, jf)
                            + ln_binomial(nf + beta - 2.0 - jf, nf - 1.0 - jf)
                            - norm
                    })
                    .collect()
            }
            WeightSpec::AssociatedHahn { alpha, beta } => {
                let pre = (nf - 1.0) * nf.ln() + ln_gamma(nf + beta - 1.0) + ln_gamma(alpha);
                (0..n)
                    .map(|j| {
                        let jf = j as f64;
                        pre - ln_gamma(jf + 1.0)
                            - ln_gamma(alpha + jf)
                            - ln_gamma(nf - jf)
                            - ln_gamma(nf + beta - 1.0 - jf)
                    })
                    .collect()
            }
            WeightSpec::GenericField(_) => unreachable!(),
        }
    }
}

#[derive(Clone, Debug)]
enum Origin {
    Direct,
    /// Dual of the stored log-weights; kept so that the mp weights are
    /// formed exactly and so that dualizing twice returns the original.
    DualOf(Arc<LogWeights>),
}

/// Natural logs of the weights w_{N,j} on a node set.
#[derive(Clone, Debug)]
pub struct LogWeights {
    nodeset: NodeSet,
    logw: Vec<f64>,
    origin: Origin,
}

fn is_unit_grid(ns: &NodeSet) -> bool {
    let n = ns.len() as f64;
    ns.nodes()
        .iter()
        .enumerate()
        .all(|(j, &x)| (x - (j as f64 + 0.5) / n).abs() <= 4.0 * f64::EPSILON)
}

pub fn log_weight(spec: &WeightSpec, nodeset: &NodeSet) -> Result<LogWeights> {
    spec.validate()?;
    let n = nodeset.len();
    let logw = match spec {
        WeightSpec::GenericField(g) => {
            let rows = nodeset.log_vandermonde_rows();
            let nf = n as f64;
            nodeset
                .nodes()
                .iter()
                .zip(&rows)
                .map(|(&x, r)| {
                    let eta = g.eta.as_ref().map_or(0.0, |e| e(x));
                    -nf * (g.v)(x) - g.gamma - eta / nf - r
                })
                .collect()
        }
        _ => {
            if !is_unit_grid(nodeset) {
                return Err(Error::config(
                    "classical weights are defined on the nodes (j+1/2)/N of (0,1)",
                ));
            }
            spec.classical_logw(n)
        }
    };
    LogWeights::new(nodeset.clone(), logw)
}

/// log w̄_j = −log w_j − 2 Σ_{n≠j} log|x_j − x_n|.
pub fn dual_weights(w: &LogWeights) -> LogWeights {
    if let Origin::DualOf(orig) = &w.origin {
        return (**orig).clone();
    }
    let rows = w.nodeset.log_vandermonde_rows();
    let logw = w.logw.iter().zip(&rows).map(|(l, r)| -l - 2.0 * r).collect();
    LogWeights {
        nodeset: w.nodeset.clone(),
        logw,
        origin: Origin::DualOf(Arc::new(w.clone())),
    }
}

impl LogWeights {
    pub fn new(nodeset: NodeSet, logw: Vec<f64>) -> Result<Self> {
        if logw.len() != nodeset.len() {
            return Err(Error::config("weight vector length differs from node count"));
        }
        if let Some(j) = logw.iter().position(|v| !v.is_finite()) {
            return Err(Error::numeric(format!("log-weight {j} is not finite")));
        }
        Ok(LogWeights {
            nodeset,
            logw,
            origin: Origin::Direct,
        })
    }

    pub fn nodeset(&self) -> &NodeSet {
        &self.nodeset
    }

    pub fn nodes(&self) -> &[f64] {
        self.nodeset.nodes()
    }

    pub fn logw(&self) -> &[f64] {
        &self.logw
    }

    pub fn len(&self) -> usize {
        self.logw.len()
    }

    pub fn is_empty(&self) -> bool {
        self.logw.is_empty()
    }

    pub fn is_dual(&self) -> bool {
        matches!(self.origin, Origin::DualOf(_))
    }

    /// Weights at `bits` of precision. Dual weights are formed as
    /// 1/(w_j Π(x_j−x_n)²) directly in multiprecision.
    pub fn mp_weights(&self, bits: u32) -> Vec<Float> {
        match &self.origin {
            Origin::Direct => self
                .logw
                .iter()
                .map(|&l| Float::with_val(bits, l).exp())
                .collect(),
            Origin::DualOf(orig) => {
                let w = orig.mp_weights(bits);
                let x = self.nodes();
                w.into_iter()
                    .enumerate()
                    .map(|(j, wj)| {
                        let mut prod = wj;
                        for (n, &xn) in x.iter().enumerate() {
                            if n != j {
                                let d = Float::with_val(bits, x[j]) - xn;
                                prod *= d.square();
                            }
                        }
                        prod.recip()
                    })
                    .collect()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mean_var(v: &[f64]) -> (f64, f64) {
        let m = v.iter().sum::<f64>() / v.len() as f64;
        (m, v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / v.len() as f64)
    }

    #[test]
    fn krawtchouk_two_nodes() {
        let ns = NodeSet::unit(2);
        let w = log_weight(&WeightSpec::krawtchouk(0.5), &ns).unwrap();
        for l in w.logw() {
            assert!((l - 2f64.ln()).abs() < 1e-15);
        }
    }

    #[test]
    fn symmetric_krawtchouk_is_symmetric() {
        let ns = NodeSet::unit(17);
        let w = log_weight(&WeightSpec::krawtchouk(0.5), &ns).unwrap();
        for j in 0..17 {
            assert!((w.logw()[j] - w.logw()[16 - j]).abs() < 1e-12);
        }
    }

    #[test]
    fn krawtchouk_matches_its_field_form() {
        let n = 40;
        let ns = NodeSet::unit(n);
        let spec = WeightSpec::krawtchouk(0.3);
        let closed = log_weight(&spec, &ns).unwrap();
        let field = WeightSpec::GenericField(GenericField {
            v: spec.potential(n),
            gamma: 0.0,
            eta: None,
        });
        let generic = log_weight(&field, &ns).unwrap();
        let diff: Vec<f64> = closed
            .logw()
            .iter()
            .zip(generic.logw())
            .map(|(a, b)| a - b)
            .collect();
        assert!(mean_var(&diff).1 < 1e-18);
    }

    #[test]
    fn hahn_families_match_their_field_form_to_leading_order() {
        for n in [60usize, 240] {
            let ns = NodeSet::unit(n);
            for spec in [
                WeightSpec::Hahn { alpha: 21.0, beta: 11.0 },
                WeightSpec::AssociatedHahn { alpha: 21.0, beta: 11.0 },
            ] {
                let field = WeightSpec::GenericField(GenericField {
                    v: spec.potential(n),
                    gamma: 0.0,
                    eta: None,
                });
                let a = log_weight(&spec, &ns).unwrap();
                let b = log_weight(&field, &ns).unwrap();
                let d: Vec<f64> = a.logw().iter().zip(b.logw()).map(|(x, y)| x - y).collect();
                let (m, _) = mean_var(&d);
                let spread = d.iter().map(|v| (v - m).abs()).fold(0.0, f64::max);
                // Stirling remainders near the ends stay O(1/j), bounded in N
                assert!(spread < 0.01, "{spec:?} N={n}: {spread}");
            }
        }
    }

    #[test]
    fn dual_of_two_node_weights() {
        let ns = NodeSet::unit(2);
        let w = LogWeights::new(ns, vec![0.0, 0.0]).unwrap();
        let d = dual_weights(&w);
        for l in d.logw() {
            assert!((l - 4f64.ln()).abs() < 1e-15);
        }
        let back = dual_weights(&d);
        assert_eq!(back.logw(), w.logw());
        assert!(!back.is_dual());
    }

    #[test]
    fn dual_hahn_is_associated_hahn() {
        let ns = NodeSet::unit(10);
        let h = log_weight(&WeightSpec::Hahn { alpha: 2.0, beta: 2.0 }, &ns).unwrap();
        let a = log_weight(&WeightSpec::AssociatedHahn { alpha: 2.0, beta: 2.0 }, &ns).unwrap();
        let d = dual_weights(&h);
        let ratio: Vec<f64> = d.logw().iter().zip(a.logw()).map(|(x, y)| x - y).collect();
        let max_dev = ratio.iter().map(|r| (r - ratio[0]).abs()).fold(0.0, f64::max);
        assert!(max_dev < 1e-10);
    }

    #[test]
    fn mp_dual_weights_are_exact_reciprocals() {
        let ns = NodeSet::unit(6);
        let w = log_weight(&WeightSpec::Hahn { alpha: 1.5, beta: 3.0 }, &ns).unwrap();
        let d = dual_weights(&w);
        let (wm, dm) = (w.mp_weights(256), d.mp_weights(256));
        let x = ns.nodes();
        for j in 0..6 {
            let mut p = Float::with_val(256, &wm[j] * &dm[j]);
            for n in 0..6 {
                if n != j {
                    p *= (Float::with_val(256, x[j]) - x[n]).square();
                }
            }
            assert!((p - 1u32).abs() < 1e-70);
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        let ns = NodeSet::unit(4);
        assert!(log_weight(&WeightSpec::Krawtchouk { p: 0.6, q: 0.6 }, &ns)
            .unwrap_err()
            .is_config());
        assert!(log_weight(&WeightSpec::Hahn { alpha: 0.0, beta: 1.0 }, &ns)
            .unwrap_err()
            .is_config());
    }
}
