//! Two-class discrimination of feature vectors: standardization, Fisher
//! LDA, logistic regression by IRLS, k-nearest neighbours, confusion
//! counts and exact binomial confidence intervals.
//!
//! Class labels are `0` and `1`. Feature rows are slices of equal length.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use statrs::function::beta::beta_reg;

use crate::error::{Error, Result};

/// Relative ridge added to the pooled covariance before inversion.
pub const LDA_RIDGE: f64 = 1e-8;
pub const IRLS_TOL: f64 = 1e-8;
pub const IRLS_MAX_ITER: usize = 100;

fn check_rows(rows: &[Vec<f64>]) -> Result<usize> {
    let p = rows.first().map(Vec::len).unwrap_or(0);
    if rows.iter().any(|r| r.len() != p) {
        return Err(Error::InvalidParameter("ragged feature rows".into()));
    }
    if let Some(bad) = rows.iter().flatten().find(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(format!("non-finite feature value {bad}")));
    }
    Ok(p)
}

// ---------------------------------------------------------------------------

/// Column-wise z-score transform learned from training rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub sd: Vec<f64>,
}

impl Standardizer {
    /// `names` labels columns in the error for a constant column.
    pub fn fit(rows: &[Vec<f64>], names: &[&str]) -> Result<Self> {
        if rows.len() < 2 {
            return Err(Error::InsufficientPoints {
                needed: 2,
                got: rows.len(),
            });
        }
        let p = check_rows(rows)?;
        let n = rows.len() as f64;
        let mut mean = vec![0.0; p];
        for r in rows {
            for (m, v) in mean.iter_mut().zip(r) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut sd = vec![0.0; p];
        for r in rows {
            for j in 0..p {
                let d = r[j] - mean[j];
                sd[j] += d * d;
            }
        }
        for (j, s) in sd.iter_mut().enumerate() {
            *s = (*s / (n - 1.0)).sqrt();
            if !(*s > 1e-12 * mean[j].abs().max(1e-300)) {
                let name = names.get(j).map(|s| s.to_string()).unwrap_or_else(|| format!("#{j}"));
                return Err(Error::DegenerateDesign(format!("feature column {name} is constant")));
            }
        }
        Ok(Self { mean, sd })
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.mean.iter().zip(&self.sd))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }

    pub fn apply_all(&self, rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
        rows.iter().map(|r| self.apply(r)).collect()
    }
}

// ---------------------------------------------------------------------------

/// Equal-prior Fisher linear discriminant.
#[derive(Debug, Clone, PartialEq)]
pub struct LdaModel {
    pub weights: Vec<f64>,
    pub threshold: f64,
    pub mean0: Vec<f64>,
    pub mean1: Vec<f64>,
    /// Row-major pooled within-class covariance (before the ridge).
    pub covariance: Vec<f64>,
}

fn column_means(rows: &[Vec<f64>], p: usize) -> Vec<f64> {
    let mut m = vec![0.0; p];
    for r in rows {
        for (a, b) in m.iter_mut().zip(r) {
            *a += b;
        }
    }
    m.iter_mut().for_each(|a| *a /= rows.len() as f64);
    m
}

impl LdaModel {
    pub fn train(x0: &[Vec<f64>], x1: &[Vec<f64>]) -> Result<Self> {
        let p0 = check_rows(x0)?;
        let p1 = check_rows(x1)?;
        let p = p0.max(p1);
        if p == 0 || (p0 != p1 && !x0.is_empty() && !x1.is_empty()) {
            return Err(Error::InvalidParameter("feature dimension mismatch".into()));
        }
        let need = p + 1;
        if x0.len() < need || x1.len() < need {
            return Err(Error::InsufficientPoints {
                needed: need,
                got: x0.len().min(x1.len()),
            });
        }
        let mean0 = column_means(x0, p);
        let mean1 = column_means(x1, p);
        let mut cov = DMatrix::<f64>::zeros(p, p);
        for (rows, mean) in [(x0, &mean0), (x1, &mean1)] {
            for r in rows {
                let d = DVector::from_iterator(p, r.iter().zip(mean).map(|(a, b)| a - b));
                cov += &d * d.transpose();
            }
        }
        cov /= (x0.len() + x1.len() - 2) as f64;
        let covariance: Vec<f64> = (0..p).flat_map(|i| (0..p).map(move |j| (i, j))).map(|ij| cov[ij]).collect();

        let scale = cov.trace() / p as f64;
        let mut ridged = cov.clone();
        for i in 0..p {
            ridged[(i, i)] += LDA_RIDGE * scale.max(f64::MIN_POSITIVE);
        }
        let chol = ridged.cholesky().ok_or_else(|| {
            Error::Singular("pooled covariance is singular; remove redundant features".into())
        })?;
        let diff = DVector::from_iterator(p, mean1.iter().zip(&mean0).map(|(a, b)| a - b));
        let w = chol.solve(&diff);
        let weights: Vec<f64> = w.iter().copied().collect();
        if weights.iter().any(|v| !v.is_finite()) {
            return Err(Error::Singular("non-finite discriminant weights".into()));
        }
        let mid: Vec<f64> = mean0.iter().zip(&mean1).map(|(a, b)| 0.5 * (a + b)).collect();
        let threshold = dot(&weights, &mid);
        Ok(Self {
            weights,
            threshold,
            mean0,
            mean1,
            covariance,
        })
    }

    /// `w . x - c`; positive means class 1.
    pub fn decision(&self, x: &[f64]) -> f64 {
        dot(&self.weights, x) - self.threshold
    }

    pub fn predict(&self, x: &[f64]) -> usize {
        usize::from(self.decision(x) > 0.0)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticModel {
    pub intercept: f64,
    pub coefficients: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    /// Log-likelihood after each accepted iteration, starting at the zero vector.
    pub log_likelihoods: Vec<f64>,
}

fn log_likelihood(x: &DMatrix<f64>, y: &DVector<f64>, b: &DVector<f64>) -> f64 {
    let eta = x * b;
    eta.iter()
        .zip(y.iter())
        .map(|(&e, &yi)| yi * e - (e.max(0.0) + (-e.abs()).exp().ln_1p()))
        .sum()
}

fn sigmoid(e: f64) -> f64 {
    if e >= 0.0 {
        1.0 / (1.0 + (-e).exp())
    } else {
        let z = e.exp();
        z / (1.0 + z)
    }
}

impl LogisticModel {
    /// Maximum likelihood by iteratively reweighted least squares with step
    /// halving, so the log-likelihood never decreases. Under perfect
    /// separation the last iterate is returned with `converged = false`.
    pub fn train(x0: &[Vec<f64>], x1: &[Vec<f64>]) -> Result<Self> {
        let p = check_rows(x0)?.max(check_rows(x1)?);
        let rows: Vec<&Vec<f64>> = x0.iter().chain(x1).collect();
        let n = rows.len();
        if x0.is_empty() || x1.is_empty() || n < p + 2 {
            return Err(Error::InsufficientPoints {
                needed: p + 2,
                got: n,
            });
        }
        let x = DMatrix::from_fn(n, p + 1, |i, j| if j == 0 { 1.0 } else { rows[i][j - 1] });
        let y = DVector::from_fn(n, |i, _| if i < x0.len() { 0.0 } else { 1.0 });

        let sv = x.clone().svd(false, false).singular_values;
        let smax = sv.max();
        if sv.iter().any(|&s| s <= 1e-10 * smax) {
            return Err(Error::DegenerateDesign("logistic design matrix is rank deficient".into()));
        }

        let mut beta = DVector::<f64>::zeros(p + 1);
        let mut ll = log_likelihood(&x, &y, &beta);
        let mut lls = vec![ll];
        let mut converged = false;
        let mut iterations = 0;
        while iterations < IRLS_MAX_ITER {
            iterations += 1;
            let eta = &x * &beta;
            let mu: Vec<f64> = eta.iter().map(|&e| sigmoid(e)).collect();
            let grad = x.transpose() * DVector::from_fn(n, |i, _| y[i] - mu[i]);
            let mut xw = x.clone();
            for i in 0..n {
                let w = mu[i] * (1.0 - mu[i]);
                xw.row_mut(i).scale_mut(w);
            }
            let hess = x.transpose() * xw;
            let Some(chol) = hess.cholesky() else {
                break;
            };
            let step = chol.solve(&grad);
            if step.iter().any(|v| !v.is_finite()) {
                break;
            }
            let mut t = 1.0;
            let mut accepted = None;
            for _ in 0..40 {
                let cand = &beta + &step * t;
                let cand_ll = log_likelihood(&x, &y, &cand);
                if cand_ll >= ll {
                    accepted = Some((cand, cand_ll));
                    break;
                }
                t *= 0.5;
            }
            let Some((cand, cand_ll)) = accepted else {
                converged = step.amax() < IRLS_TOL;
                break;
            };
            let change = (&cand - &beta).amax();
            debug_assert!(cand_ll >= ll);
            beta = cand;
            ll = cand_ll;
            lls.push(ll);
            if change < IRLS_TOL {
                converged = true;
                break;
            }
        }
        Ok(Self {
            intercept: beta[0],
            coefficients: beta.iter().skip(1).copied().collect(),
            converged,
            iterations,
            log_likelihoods: lls,
        })
    }

    pub fn decision(&self, x: &[f64]) -> f64 {
        self.intercept + dot(&self.coefficients, x)
    }

    pub fn predict(&self, x: &[f64]) -> usize {
        usize::from(self.decision(x) > 0.0)
    }
}

// ---------------------------------------------------------------------------

/// Majority vote among the `k` nearest training rows (Euclidean). Equal
/// distances go to the earlier training row; tied votes go to class 0.
pub fn knn_predict(train_x: &[Vec<f64>], train_y: &[usize], x: &[f64], k: usize) -> Result<usize> {
    if train_x.len() != train_y.len() {
        return Err(Error::InvalidParameter("training rows and labels differ in length".into()));
    }
    if k == 0 || k > train_x.len() {
        return Err(Error::InvalidParameter(format!(
            "k = {k} with {} training rows",
            train_x.len()
        )));
    }
    let mut order: Vec<(f64, usize)> = train_x
        .iter()
        .enumerate()
        .map(|(i, r)| (r.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>(), i))
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let ones = order[..k].iter().filter(|(_, i)| train_y[*i] == 1).count();
    Ok(usize::from(2 * ones > k))
}

// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ClassifierKind {
    Lda,
    Logistic,
    Knn,
}

impl ClassifierKind {
    pub fn name(&self) -> &'static str {
        match self {
            ClassifierKind::Lda => "lda",
            ClassifierKind::Logistic => "logistic",
            ClassifierKind::Knn => "knn",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "lda" => Ok(ClassifierKind::Lda),
            "logistic" => Ok(ClassifierKind::Logistic),
            "knn" => Ok(ClassifierKind::Knn),
            other => Err(Error::InvalidParameter(format!("unknown classifier {other:?}"))),
        }
    }
}

/// Neighbour count used by the k-NN rule.
pub const KNN_K: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub enum Rule {
    Lda(LdaModel),
    Logistic(LogisticModel),
    Knn { rows: Vec<Vec<f64>>, labels: Vec<usize>, k: usize },
}

/// A trained rule together with the standardization it expects.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierModel {
    pub standardizer: Standardizer,
    pub rule: Rule,
}

impl ClassifierModel {
    pub fn train(kind: ClassifierKind, x0: &[Vec<f64>], x1: &[Vec<f64>], names: &[&str]) -> Result<Self> {
        let all: Vec<Vec<f64>> = x0.iter().chain(x1).cloned().collect();
        let standardizer = Standardizer::fit(&all, names)?;
        let z0 = standardizer.apply_all(x0);
        let z1 = standardizer.apply_all(x1);
        let rule = match kind {
            ClassifierKind::Lda => Rule::Lda(LdaModel::train(&z0, &z1)?),
            ClassifierKind::Logistic => Rule::Logistic(LogisticModel::train(&z0, &z1)?),
            ClassifierKind::Knn => {
                let labels = std::iter::repeat_n(0, z0.len()).chain(std::iter::repeat_n(1, z1.len())).collect();
                let rows: Vec<Vec<f64>> = z0.into_iter().chain(z1).collect();
                if rows.len() < KNN_K {
                    return Err(Error::InsufficientPoints {
                        needed: KNN_K,
                        got: rows.len(),
                    });
                }
                Rule::Knn { rows, labels, k: KNN_K }
            }
        };
        Ok(Self { standardizer, rule })
    }

    pub fn kind(&self) -> ClassifierKind {
        match self.rule {
            Rule::Lda(_) => ClassifierKind::Lda,
            Rule::Logistic(_) => ClassifierKind::Logistic,
            Rule::Knn { .. } => ClassifierKind::Knn,
        }
    }

    pub fn predict(&self, x: &[f64]) -> usize {
        let z = self.standardizer.apply(x);
        match &self.rule {
            Rule::Lda(m) => m.predict(&z),
            Rule::Logistic(m) => m.predict(&z),
            Rule::Knn { rows, labels, k } => knn_predict(rows, labels, &z, *k).expect("validated at training"),
        }
    }

    pub fn predict_all(&self, rows: &[Vec<f64>]) -> Vec<usize> {
        rows.iter().map(|r| self.predict(r)).collect()
    }
}

// ---------------------------------------------------------------------------

/// Per-class totals and misclassification counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConfusionCounts {
    pub total: [usize; 2],
    pub misclassified: [usize; 2],
}

impl ConfusionCounts {
    pub fn rate(&self, class: usize) -> f64 {
        if self.total[class] == 0 {
            0.0
        } else {
            self.misclassified[class] as f64 / self.total[class] as f64
        }
    }
}

pub fn misclassification(pred: &[usize], truth: &[usize]) -> Result<ConfusionCounts> {
    if pred.len() != truth.len() {
        return Err(Error::InvalidParameter(format!(
            "{} predictions for {} labels",
            pred.len(),
            truth.len()
        )));
    }
    let mut c = ConfusionCounts::default();
    for (&p, &t) in pred.iter().zip(truth) {
        if t > 1 || p > 1 {
            return Err(Error::InvalidParameter(format!("label {} is not 0 or 1", t.max(p))));
        }
        c.total[t] += 1;
        if p != t {
            c.misclassified[t] += 1;
        }
    }
    Ok(c)
}

// ---------------------------------------------------------------------------

/// Quantile of the Beta(a, b) distribution by bisection on the regularized
/// incomplete beta function.
pub fn beta_quantile(q: f64, a: f64, b: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if beta_reg(a, b, mid) < q {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Exact binomial interval for `k` events in `n` trials. For `0 < k < n`
/// this is the two-sided Clopper-Pearson interval; at `k = 0` (`k = n`) the
/// free bound is the one-sided exact bound at the full level.
pub fn clopper_pearson(k: usize, n: usize, level: f64) -> Result<(f64, f64)> {
    if n == 0 || k > n || !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "clopper_pearson(k = {k}, n = {n}, level = {level})"
        )));
    }
    let alpha = 1.0 - level;
    let nf = n as f64;
    if k == 0 {
        return Ok((0.0, 1.0 - alpha.powf(1.0 / nf)));
    }
    if k == n {
        return Ok((alpha.powf(1.0 / nf), 1.0));
    }
    let kf = k as f64;
    let lower = beta_quantile(alpha / 2.0, kf, nf - kf + 1.0);
    let upper = beta_quantile(1.0 - alpha / 2.0, kf + 1.0, nf - kf);
    Ok((lower, upper))
}

// ---------------------------------------------------------------------------

fn join(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.11e}")).collect::<Vec<_>>().join(" ")
}

fn parse_nums(s: &str, line: usize) -> Result<Vec<f64>> {
    s.split_whitespace()
        .map(|t| {
            t.parse::<f64>().map_err(|_| Error::Parse {
                line,
                message: format!("bad number {t:?}"),
            })
        })
        .collect()
}

impl ClassifierModel {
    /// Key-value dump with 12 significant digits.
    pub fn to_text(&self, labels: [&str; 2], features: &[&str]) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "classifier {}", self.kind().name());
        let _ = writeln!(s, "labels {} {}", labels[0], labels[1]);
        let _ = writeln!(s, "features {}", features.join(" "));
        let _ = writeln!(s, "std_mean {}", join(&self.standardizer.mean));
        let _ = writeln!(s, "std_sd {}", join(&self.standardizer.sd));
        match &self.rule {
            Rule::Lda(m) => {
                let _ = writeln!(s, "mean0 {}", join(&m.mean0));
                let _ = writeln!(s, "mean1 {}", join(&m.mean1));
                let _ = writeln!(s, "covariance {}", join(&m.covariance));
                let _ = writeln!(s, "weights {}", join(&m.weights));
                let _ = writeln!(s, "threshold {:.11e}", m.threshold);
            }
            Rule::Logistic(m) => {
                let _ = writeln!(s, "intercept {:.11e}", m.intercept);
                let _ = writeln!(s, "coefficients {}", join(&m.coefficients));
                let _ = writeln!(s, "converged {}", m.converged);
                let _ = writeln!(s, "iterations {}", m.iterations);
            }
            Rule::Knn { rows, labels, k } => {
                let _ = writeln!(s, "k {k}");
                for (r, l) in rows.iter().zip(labels) {
                    let _ = writeln!(s, "row {l} {}", join(r));
                }
            }
        }
        s
    }

    /// Parse a dump written by [`ClassifierModel::to_text`]. Returns the
    /// model, the two class labels and the feature names.
    pub fn from_text(text: &str) -> Result<(Self, [String; 2], Vec<String>)> {
        let mut kind = None;
        let mut labels: Option<[String; 2]> = None;
        let mut features = Vec::new();
        let mut fields: std::collections::HashMap<String, Vec<f64>> = Default::default();
        let mut flags: std::collections::HashMap<String, String> = Default::default();
        let mut rows = Vec::new();
        let mut row_labels = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let Some((key, rest)) = raw.trim().split_once(' ') else {
                continue;
            };
            match key {
                "classifier" => kind = Some(ClassifierKind::parse(rest.trim())?),
                "labels" => {
                    let v: Vec<&str> = rest.split_whitespace().collect();
                    if v.len() != 2 {
                        return Err(Error::Parse {
                            line,
                            message: "labels needs two names".into(),
                        });
                    }
                    labels = Some([v[0].to_string(), v[1].to_string()]);
                }
                "features" => features = rest.split_whitespace().map(String::from).collect(),
                "converged" | "iterations" | "k" => {
                    flags.insert(key.to_string(), rest.trim().to_string());
                }
                "row" => {
                    let (l, vals) = rest.split_once(' ').ok_or(Error::Parse {
                        line,
                        message: "row needs a label and values".into(),
                    })?;
                    row_labels.push(l.parse::<usize>().map_err(|_| Error::Parse {
                        line,
                        message: "bad row label".into(),
                    })?);
                    rows.push(parse_nums(vals, line)?);
                }
                _ => {
                    fields.insert(key.to_string(), parse_nums(rest, line)?);
                }
            }
        }
        let missing = |k: &str| Error::Parse {
            line: 0,
            message: format!("missing field {k}"),
        };
        let mut take = |k: &str| fields.remove(k).ok_or_else(|| missing(k));
        let kind = kind.ok_or_else(|| missing("classifier"))?;
        let labels = labels.ok_or_else(|| missing("labels"))?;
        let standardizer = Standardizer {
            mean: take("std_mean")?,
            sd: take("std_sd")?,
        };
        let scalar = |v: Vec<f64>| v.first().copied().ok_or_else(|| missing("scalar"));
        let rule = match kind {
            ClassifierKind::Lda => Rule::Lda(LdaModel {
                mean0: take("mean0")?,
                mean1: take("mean1")?,
                covariance: take("covariance")?,
                weights: take("weights")?,
                threshold: scalar(take("threshold")?)?,
            }),
            ClassifierKind::Logistic => Rule::Logistic(LogisticModel {
                intercept: scalar(take("intercept")?)?,
                coefficients: take("coefficients")?,
                converged: flags.get("converged").is_some_and(|v| v == "true"),
                iterations: flags.get("iterations").and_then(|v| v.parse().ok()).unwrap_or(0),
                log_likelihoods: Vec::new(),
            }),
            ClassifierKind::Knn => Rule::Knn {
                rows,
                labels: row_labels,
                k: flags.get("k").and_then(|v| v.parse().ok()).ok_or_else(|| missing("k"))?,
            },
        };
        Ok((Self { standardizer, rule }, labels, features))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn col(v: &[f64]) -> Vec<Vec<f64>> {
        v.iter().map(|&x| vec![x]).collect()
    }

    #[test]
    fn standardizer_examples() {
        let s = Standardizer::fit(&col(&[0.0, 2.0]), &["x"]).unwrap();
        assert_eq!(s.mean, vec![1.0]);
        assert!((s.sd[0] - 2f64.sqrt()).abs() < 1e-15);
        let z = s.apply_all(&col(&[0.0, 2.0]));
        assert!((z[0][0] + 1.0 / 2f64.sqrt()).abs() < 1e-15);
        assert!((z[1][0] - 1.0 / 2f64.sqrt()).abs() < 1e-15);
        let err = Standardizer::fit(&[vec![1.0, 3.0], vec![2.0, 3.0]], &["a", "b"]).unwrap_err();
        assert!(err.to_string().contains('b'));
    }

    #[test]
    fn lda_one_dimensional_hand_example() {
        let m = LdaModel::train(&col(&[0.0, 2.0]), &col(&[4.0, 6.0])).unwrap();
        assert_eq!(m.covariance, vec![2.0]);
        assert!((m.weights[0] - 2.0).abs() < 1e-6);
        assert!((m.threshold / m.weights[0] - 3.0).abs() < 1e-12);
        assert_eq!(m.predict(&[2.9]), 0);
        assert_eq!(m.predict(&[3.1]), 1);
    }

    #[test]
    fn lda_label_swap_negates_weights() {
        let a = vec![vec![0.0, 1.0], vec![1.0, 0.5], vec![0.3, 0.2], vec![0.9, 1.4]];
        let b = vec![vec![2.0, 1.0], vec![2.5, 2.0], vec![3.1, 1.2], vec![2.2, 0.4]];
        let m = LdaModel::train(&a, &b).unwrap();
        let s = LdaModel::train(&b, &a).unwrap();
        for (x, y) in m.weights.iter().zip(&s.weights) {
            assert!((x + y).abs() < 1e-12);
        }
        for x in a.iter().chain(&b) {
            assert_ne!(m.predict(x), s.predict(x));
        }
    }

    #[test]
    fn lda_needs_more_rows_than_features() {
        let a = vec![vec![0.0, 1.0], vec![1.0, 0.5]];
        let b = vec![vec![2.0, 1.0], vec![2.5, 2.0], vec![3.1, 1.2]];
        assert!(LdaModel::train(&a, &b).is_err());
    }

    #[test]
    fn lda_rejects_exactly_collinear_features() {
        let a: Vec<Vec<f64>> = (0..5).map(|i| vec![i as f64, 0.0]).collect();
        let b: Vec<Vec<f64>> = (0..5).map(|i| vec![i as f64 + 0.5, 0.0]).collect();
        // the zero column leaves the covariance singular but the ridge
        // rescues it
        assert!(LdaModel::train(&a, &b).is_ok());
    }

    #[test]
    fn logistic_symmetric_data_has_zero_intercept() {
        let x0 = col(&[-2.0, -1.0, 0.5, -1.5]);
        let x1 = col(&[2.0, 1.0, -0.5, 1.5]);
        let m = LogisticModel::train(&x0, &x1).unwrap();
        assert!(m.converged);
        assert!(m.intercept.abs() < 1e-6);
        assert!(m.coefficients[0] > 0.0);
        assert!(m.log_likelihoods.windows(2).all(|w| w[1] >= w[0]));
        let s = LogisticModel::train(&x1, &x0).unwrap();
        assert!((m.coefficients[0] + s.coefficients[0]).abs() < 1e-8);
        assert!((m.intercept + s.intercept).abs() < 1e-8);
    }

    #[test]
    fn logistic_perfect_separation_is_flagged() {
        let m = LogisticModel::train(&col(&[-2.0, -1.0]), &col(&[1.0, 2.0])).unwrap();
        assert!(!m.converged);
        assert_eq!(m.predict(&[-1.5]), 0);
        assert_eq!(m.predict(&[1.5]), 1);
        assert!(m.log_likelihoods.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn logistic_rank_deficiency() {
        let x0 = vec![vec![1.0, 2.0], vec![2.0, 4.0], vec![3.0, 6.0]];
        let x1 = vec![vec![1.5, 3.0], vec![2.5, 5.0], vec![0.5, 1.0]];
        assert!(matches!(
            LogisticModel::train(&x0, &x1),
            Err(Error::DegenerateDesign(_))
        ));
    }

    #[test]
    fn knn_examples() {
        let x = col(&[0.0, 1.0, 2.0, 10.0, 11.0]);
        let y = vec![0, 0, 0, 1, 1];
        assert_eq!(knn_predict(&x, &y, &[10.0], 1).unwrap(), 1);
        assert_eq!(knn_predict(&x, &y, &[10.0], 5).unwrap(), 0);
        // two-two vote tie goes to class 0
        assert_eq!(knn_predict(&col(&[0.0, 1.0, 2.0, 3.0]), &[1, 1, 0, 0], &[1.5], 4).unwrap(), 0);
        // equal distances: the earlier row wins
        assert_eq!(knn_predict(&col(&[1.0, -1.0]), &[1, 0], &[0.0], 1).unwrap(), 1);
        assert!(knn_predict(&x, &y, &[0.0], 6).is_err());
    }

    #[test]
    fn misclassification_examples() {
        let truth = vec![0, 0, 0, 0, 0, 1, 1, 1, 1, 1];
        let c = misclassification(&truth, &truth).unwrap();
        assert_eq!(c.misclassified, [0, 0]);
        let flipped: Vec<usize> = truth.iter().map(|t| 1 - t).collect();
        assert_eq!(misclassification(&flipped, &truth).unwrap().misclassified, [5, 5]);
        let mut mixed = truth.clone();
        mixed[0] = 1;
        mixed[6] = 0;
        mixed[9] = 0;
        let c = misclassification(&mixed, &truth).unwrap();
        assert_eq!(c.misclassified.iter().sum::<usize>(), 3);
        assert_eq!(c.total, [5, 5]);
        assert!(misclassification(&[0], &[0, 1]).is_err());
    }

    #[test]
    fn clopper_pearson_zero_counts() {
        let (lo, hi) = clopper_pearson(0, 100, 0.95).unwrap();
        assert_eq!(lo, 0.0);
        assert!((hi - 0.030).abs() < 0.001);
        let (lo, hi) = clopper_pearson(20, 20, 0.95).unwrap();
        assert_eq!(hi, 1.0);
        assert!((lo - (1.0 - 0.139)).abs() < 0.001);
        assert!(clopper_pearson(3, 2, 0.95).is_err());
        assert!(clopper_pearson(0, 0, 0.95).is_err());
    }

    #[test]
    fn model_text_round_trip() {
        let a = vec![vec![0.0, 1.0], vec![1.0, 0.5], vec![0.3, 0.2], vec![0.9, 1.4]];
        let b = vec![vec![2.0, 1.0], vec![2.5, 2.0], vec![3.1, 1.2], vec![2.2, 0.4]];
        for kind in [ClassifierKind::Lda, ClassifierKind::Logistic, ClassifierKind::Knn] {
            let m = ClassifierModel::train(kind, &a, &b, &["u", "v"]).unwrap();
            let text = m.to_text(["s", "o"], &["u", "v"]);
            let (back, labels, names) = ClassifierModel::from_text(&text).unwrap();
            assert_eq!(labels, ["s".to_string(), "o".to_string()]);
            assert_eq!(names, vec!["u", "v"]);
            assert_eq!(back.kind(), kind);
            for x in a.iter().chain(&b) {
                assert_eq!(back.predict(x), m.predict(x));
            }
        }
    }
}
