//! Synthetic benchmark data: sparse group-mean patterns, block-diagonal
//! AR(1) covariances, and multivariate normal sampling.
//!
//! Three canonical setups are provided. Setups I and II use identity
//! covariance with `p = 500` features and four groups whose means differ in a
//! sparse pattern; setup III uses `p = 10000` with three groups, means
//! `0, +m, -m`, and a group-specific covariance made of 100 AR(1) blocks of
//! alternating correlation sign. A scale factor shrinks or grows the feature
//! dimension (and block count) for fast runs; sample counts per split are
//! fixed.

use ndarray::{Array1, Array2, ArrayView1};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::sync::Arc;

use crate::dataset::LabeledDataset;
use crate::error::CrdaError;
use crate::linalg::cholesky_lower;

/// Which of the three synthetic benchmark configurations to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SetupId {
    I,
    II,
    III,
}

impl std::fmt::Display for SetupId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SetupId::I => "I",
            SetupId::II => "II",
            SetupId::III => "III",
        })
    }
}

impl std::str::FromStr for SetupId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "i" | "1" => Ok(SetupId::I),
            "ii" | "2" => Ok(SetupId::II),
            "iii" | "3" => Ok(SetupId::III),
            other => Err(format!("unknown setup {other:?} (expected I, II, or III)")),
        }
    }
}

/// AR(1) correlation matrix: entry `(i, j)` is `rho^|i - j|`.
pub fn ar1_block(rho: f64, size: usize) -> Result<Array2<f64>, CrdaError> {
    if !rho.is_finite() || rho.abs() >= 1.0 {
        return Err(CrdaError::InvalidRho { rho });
    }
    let mut m = Array2::zeros((size, size));
    for i in 0..size {
        for j in 0..size {
            m[[i, j]] = rho.powi((i as i32 - j as i32).abs());
        }
    }
    Ok(m)
}

#[derive(Debug, Clone)]
struct CovBlock {
    cov: Arc<Array2<f64>>,
    factor: Arc<Array2<f64>>,
    size: usize,
}

#[derive(Debug, Clone)]
enum CovKind {
    ScaledIdentity { p: usize, sigma: f64 },
    Blocks { blocks: Vec<CovBlock>, p: usize },
}

/// A covariance matrix kept in factored form: either `sigma2 * I` or a
/// direct sum of dense blocks, each stored with its Cholesky factor. The
/// full matrix is never materialized.
#[derive(Debug, Clone)]
pub struct CovarianceModel {
    kind: CovKind,
}

impl CovarianceModel {
    /// `sigma2 * I_p`.
    pub fn scaled_identity(p: usize, sigma2: f64) -> Result<Self, CrdaError> {
        if p == 0 {
            return Err(CrdaError::NoFeatures);
        }
        if !sigma2.is_finite() {
            return Err(CrdaError::NonFinite {
                context: "identity covariance scale",
            });
        }
        if sigma2 < 0.0 {
            return Err(CrdaError::NotPositiveDefinite { block: 0 });
        }
        Ok(Self {
            kind: CovKind::ScaledIdentity {
                p,
                sigma: sigma2.sqrt(),
            },
        })
    }

    /// Direct sum of the given blocks, in order. Each block must be square
    /// and positive definite; only the lower triangle is read.
    pub fn block_diagonal(blocks: Vec<Array2<f64>>) -> Result<Self, CrdaError> {
        if blocks.is_empty() {
            return Err(CrdaError::NoFeatures);
        }
        let mut out = Vec::with_capacity(blocks.len());
        let mut p = 0usize;
        for (index, block) in blocks.into_iter().enumerate() {
            let size = block.nrows();
            if size == 0 || block.ncols() != size {
                return Err(CrdaError::DimensionMismatch {
                    context: "covariance block shape",
                    expected: size,
                    found: block.ncols(),
                });
            }
            let factor =
                cholesky_lower(&block).ok_or(CrdaError::NotPositiveDefinite { block: index })?;
            p += size;
            out.push(CovBlock {
                cov: Arc::new(block),
                factor: Arc::new(factor),
                size,
            });
        }
        Ok(Self {
            kind: CovKind::Blocks { blocks: out, p },
        })
    }

    /// Direct sum of `n_blocks` AR(1) blocks whose correlation alternates
    /// `+rho, -rho, +rho, ...`. Only two distinct blocks are factored; the
    /// rest share them.
    pub fn alternating_ar1(rho: f64, n_blocks: usize, block_size: usize) -> Result<Self, CrdaError> {
        if n_blocks == 0 || block_size == 0 {
            return Err(CrdaError::NoFeatures);
        }
        let plus = ar1_block(rho, block_size)?;
        let minus = ar1_block(-rho, block_size)?;
        let plus_factor = cholesky_lower(&plus).ok_or(CrdaError::NotPositiveDefinite { block: 0 })?;
        let minus_factor =
            cholesky_lower(&minus).ok_or(CrdaError::NotPositiveDefinite { block: 1 })?;
        let plus_block = CovBlock {
            cov: Arc::new(plus),
            factor: Arc::new(plus_factor),
            size: block_size,
        };
        let minus_block = CovBlock {
            cov: Arc::new(minus),
            factor: Arc::new(minus_factor),
            size: block_size,
        };
        let blocks = (0..n_blocks)
            .map(|b| {
                if b % 2 == 0 {
                    plus_block.clone()
                } else {
                    minus_block.clone()
                }
            })
            .collect();
        Ok(Self {
            kind: CovKind::Blocks {
                blocks,
                p: n_blocks * block_size,
            },
        })
    }

    pub fn p(&self) -> usize {
        match &self.kind {
            CovKind::ScaledIdentity { p, .. } => *p,
            CovKind::Blocks { p, .. } => *p,
        }
    }

    /// Number of diagonal blocks; `None` for the scaled identity.
    pub fn block_count(&self) -> Option<usize> {
        match &self.kind {
            CovKind::ScaledIdentity { .. } => None,
            CovKind::Blocks { blocks, .. } => Some(blocks.len()),
        }
    }

    /// Applies the covariance to a vector without forming the matrix.
    pub fn apply(&self, x: ArrayView1<f64>) -> Result<Array1<f64>, CrdaError> {
        if x.len() != self.p() {
            return Err(CrdaError::DimensionMismatch {
                context: "covariance operand length",
                expected: self.p(),
                found: x.len(),
            });
        }
        match &self.kind {
            CovKind::ScaledIdentity { sigma, .. } => Ok(&x * (sigma * sigma)),
            CovKind::Blocks { blocks, p } => {
                let mut y = Array1::zeros(*p);
                let mut offset = 0usize;
                for block in blocks {
                    let xs = x.slice(ndarray::s![offset..offset + block.size]);
                    let ys = block.cov.dot(&xs);
                    y.slice_mut(ndarray::s![offset..offset + block.size])
                        .assign(&ys);
                    offset += block.size;
                }
                Ok(y)
            }
        }
    }

    /// Writes `mean + L * z` into `out`, drawing standard normals in feature
    /// order from `rng`.
    fn sample_row(&self, rng: &mut ChaCha8Rng, mean: ArrayView1<f64>, out: &mut [f64]) {
        match &self.kind {
            CovKind::ScaledIdentity { sigma, .. } => {
                for (j, slot) in out.iter_mut().enumerate() {
                    let z: f64 = rng.sample(StandardNormal);
                    *slot = mean[j] + sigma * z;
                }
            }
            CovKind::Blocks { blocks, .. } => {
                let mut z = vec![0.0f64; blocks.iter().map(|b| b.size).max().unwrap_or(0)];
                let mut offset = 0usize;
                for block in blocks {
                    for slot in z.iter_mut().take(block.size) {
                        *slot = rng.sample(StandardNormal);
                    }
                    let l = block.factor.as_ref();
                    for i in 0..block.size {
                        let mut acc = 0.0;
                        for (j, &zj) in z.iter().enumerate().take(i + 1) {
                            acc += l[[i, j]] * zj;
                        }
                        out[offset + i] = mean[offset + i] + acc;
                    }
                    offset += block.size;
                }
            }
        }
    }
}

/// Draws `count` independent rows from `N(mean, cov)`.
pub fn sample_mvn(
    mean: ArrayView1<f64>,
    cov: &CovarianceModel,
    count: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Array2<f64>, CrdaError> {
    if mean.len() != cov.p() {
        return Err(CrdaError::DimensionMismatch {
            context: "mean length",
            expected: cov.p(),
            found: mean.len(),
        });
    }
    let mut out = Array2::zeros((count, mean.len()));
    for mut row in out.rows_mut() {
        cov.sample_row(rng, mean, row.as_slice_mut().unwrap());
    }
    Ok(out)
}

fn staircase_means(p: usize, t: usize, groups: usize, value: f64) -> Array2<f64> {
    let mut m = Array2::zeros((p, groups));
    for g in 0..groups {
        for i in t * g..t * (g + 1) {
            m[[i, g]] = value;
        }
    }
    m
}

fn level_means(p: usize, width: usize, groups: usize) -> Array2<f64> {
    let mut m = Array2::zeros((p, groups));
    for g in 0..groups {
        for i in 0..width {
            m[[i, g]] = g as f64 / 3.0;
        }
    }
    m
}

fn signed_pair_means(p: usize, width: usize) -> Array2<f64> {
    let mut m = Array2::zeros((p, 3));
    for i in 0..width {
        m[[i, 1]] = 0.5;
        m[[i, 2]] = -0.5;
    }
    m
}

/// Group means of setup I: four groups, each with 25 consecutive entries of
/// 0.7 in disjoint stretches of the first 100 features, `p = 500`.
pub fn means_setup1() -> Array2<f64> {
    staircase_means(500, 25, 4, 0.7)
}

/// Group means of setup II: group `g` is the constant `(g - 1) / 3` on the
/// first 100 features (so group 1 is the zero vector), `p = 500`.
pub fn means_setup2() -> Array2<f64> {
    level_means(500, 100, 4)
}

/// Group means of setup III: zero, `+1/2`, and `-1/2` on the first 200 of
/// `p = 10000` features.
pub fn means_setup3() -> Array2<f64> {
    signed_pair_means(10000, 200)
}

/// Covariance of one setup-III group: 100 AR(1) blocks of size 100 with
/// alternating correlation sign.
pub fn cov_setup3(rho: f64) -> Result<CovarianceModel, CrdaError> {
    CovarianceModel::alternating_ar1(rho, 100, 100)
}

const SETUP3_RHOS: [f64; 3] = [0.5, 0.7, 0.9];

/// A fully resolved simulation configuration: dimensions, split sizes, group
/// means, per-group covariances, and the truly differential feature set.
#[derive(Debug, Clone)]
pub struct SetupSpec {
    id: SetupId,
    scale: f64,
    p: usize,
    n_groups: usize,
    n_validation: usize,
    n_train: usize,
    n_test: usize,
    means: Array2<f64>,
    covariances: Vec<CovarianceModel>,
    truth: Vec<usize>,
}

impl SetupSpec {
    /// Builds a setup at the given scale. The scale multiplies the feature
    /// dimension (block count for setup III) and the width of the
    /// differential pattern; split sizes are unaffected.
    pub fn new(id: SetupId, scale: f64) -> Result<Self, CrdaError> {
        if !scale.is_finite() || scale <= 0.0 {
            return Err(CrdaError::InvalidScale { scale });
        }
        let scaled = |v: f64| ((v * scale).round() as usize).max(1);
        let spec = match id {
            SetupId::I => {
                let p = scaled(500.0);
                let t = scaled(25.0);
                if 4 * t > p {
                    return Err(CrdaError::InvalidScale { scale });
                }
                Self {
                    id,
                    scale,
                    p,
                    n_groups: 4,
                    n_validation: 100,
                    n_train: 100,
                    n_test: 1000,
                    means: staircase_means(p, t, 4, 0.7),
                    covariances: vec![CovarianceModel::scaled_identity(p, 1.0)?; 4],
                    truth: (0..4 * t).collect(),
                }
            }
            SetupId::II => {
                let p = scaled(500.0);
                let width = scaled(100.0).min(p);
                Self {
                    id,
                    scale,
                    p,
                    n_groups: 4,
                    n_validation: 100,
                    n_train: 100,
                    n_test: 1000,
                    means: level_means(p, width, 4),
                    covariances: vec![CovarianceModel::scaled_identity(p, 1.0)?; 4],
                    truth: (0..width).collect(),
                }
            }
            SetupId::III => {
                let blocks = scaled(100.0);
                let p = 100 * blocks;
                let width = scaled(200.0).min(p);
                let covariances = SETUP3_RHOS
                    .iter()
                    .map(|&rho| CovarianceModel::alternating_ar1(rho, blocks, 100))
                    .collect::<Result<Vec<_>, _>>()?;
                Self {
                    id,
                    scale,
                    p,
                    n_groups: 3,
                    n_validation: 0,
                    n_train: 200,
                    n_test: 1000,
                    means: signed_pair_means(p, width),
                    covariances,
                    truth: (0..width).collect(),
                }
            }
        };
        Ok(spec)
    }

    pub fn id(&self) -> SetupId {
        self.id
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn n_groups(&self) -> usize {
        self.n_groups
    }

    pub fn n_validation(&self) -> usize {
        self.n_validation
    }

    pub fn n_train(&self) -> usize {
        self.n_train
    }

    pub fn n_test(&self) -> usize {
        self.n_test
    }

    /// `p x G` matrix of group means.
    pub fn means(&self) -> &Array2<f64> {
        &self.means
    }

    pub fn covariance(&self, group: usize) -> &CovarianceModel {
        &self.covariances[group]
    }

    /// Indices of the truly differential features.
    pub fn truth(&self) -> &[usize] {
        &self.truth
    }
}

/// One generated trial: the data splits plus the differential feature set.
#[derive(Debug, Clone)]
pub struct GeneratedTrial {
    pub train: LabeledDataset,
    pub validation: Option<LabeledDataset>,
    pub test: LabeledDataset,
    pub truth: Vec<usize>,
}

fn equal_counts(n: usize, groups: usize) -> Vec<usize> {
    let base = n / groups;
    let rem = n % groups;
    (0..groups).map(|g| base + usize::from(g < rem)).collect()
}

fn split_rng(trial_seed: u64, purpose: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed);
    rng.set_stream(purpose);
    rng
}

fn gen_split(
    spec: &SetupSpec,
    rng: &mut ChaCha8Rng,
    n: usize,
    multinomial: bool,
) -> Result<LabeledDataset, CrdaError> {
    let g = spec.n_groups();
    let labels: Vec<usize> = if multinomial {
        (0..n).map(|_| rng.gen_range(0..g)).collect()
    } else {
        equal_counts(n, g)
            .iter()
            .enumerate()
            .flat_map(|(group, &count)| std::iter::repeat(group).take(count))
            .collect()
    };
    let mut x = Array2::zeros((n, spec.p()));
    for (row, &label) in labels.iter().enumerate() {
        let mean = spec.means().column(label);
        spec.covariance(label).sample_row(
            rng,
            mean,
            x.row_mut(row).as_slice_mut().unwrap(),
        );
    }
    let label_names = (1..=g).map(|i| format!("g{i}")).collect();
    LabeledDataset::from_parts(x, labels, label_names, None)
}

/// Generates the train/validation/test splits of a trial.
///
/// Each split draws from its own RNG stream derived from the trial seed, so
/// splits are independent and the whole trial is reproducible. With
/// `multinomial` false (the default protocol), group labels are assigned in
/// exactly equal counts per split, any remainder going to the
/// smaller-numbered groups; with it true, labels are drawn uniformly at
/// random.
pub fn generate(
    spec: &SetupSpec,
    trial_seed: u64,
    multinomial: bool,
) -> Result<GeneratedTrial, CrdaError> {
    let train = gen_split(spec, &mut split_rng(trial_seed, 1), spec.n_train(), multinomial)?;
    let validation = if spec.n_validation() > 0 {
        Some(gen_split(
            spec,
            &mut split_rng(trial_seed, 2),
            spec.n_validation(),
            multinomial,
        )?)
    } else {
        None
    };
    let test = gen_split(spec, &mut split_rng(trial_seed, 3), spec.n_test(), multinomial)?;
    Ok(GeneratedTrial {
        train,
        validation,
        test,
        truth: spec.truth().to_vec(),
    })
}
