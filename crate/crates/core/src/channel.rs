//! Channel sets: generation, file I/O, validation and collinearity grouping.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{inner, norm_sqr, CMatrix};

/// Default relative inner-product tolerance for collinearity detection.
pub const DEFAULT_COLLINEAR_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum ChannelError {
    #[error("invalid dimensions M={m}, K={k}: both must be at least 1")]
    InvalidDimensions { m: usize, k: usize },
    #[error("channel variance must be positive and finite, got {0}")]
    InvalidVariance(f64),
    #[error("zero channel for user {user}")]
    ZeroChannel { user: usize },
    #[error("non-finite entry in channel of user {user}")]
    NonFinite { user: usize },
    #[error("dimension mismatch: {what} (expected {expected}, found {found})")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("collinearity tolerance must lie in (0, 1), got {0}")]
    InvalidTolerance(f64),
    #[error("malformed channel file {path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("cannot access channel file {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Where a channel set came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChannelSource {
    Seed { seed: u64, variance: f64 },
    File { path: PathBuf },
    Inline,
}

/// `M × K` complex channel matrix whose k-th column is `h_k`.
///
/// Every column has strictly positive norm and all entries are finite.
#[derive(Debug, Clone)]
pub struct ChannelSet {
    h: CMatrix,
    source: ChannelSource,
    gram: OnceLock<CMatrix>,
}

impl PartialEq for ChannelSet {
    fn eq(&self, other: &Self) -> bool {
        self.h == other.h && self.source == other.source
    }
}

impl ChannelSet {
    pub fn new(h: CMatrix, source: ChannelSource) -> Result<Self, ChannelError> {
        let (m, k) = h.shape();
        if m == 0 || k == 0 {
            return Err(ChannelError::InvalidDimensions { m, k });
        }
        for user in 0..k {
            let col = &h.as_slice()[user * m..(user + 1) * m];
            if col.iter().any(|x| !x.re.is_finite() || !x.im.is_finite()) {
                return Err(ChannelError::NonFinite { user });
            }
            if norm_sqr(col) == 0.0 {
                return Err(ChannelError::ZeroChannel { user });
            }
        }
        Ok(Self {
            h,
            source,
            gram: OnceLock::new(),
        })
    }

    /// Builds a channel set from per-user columns.
    pub fn from_columns(columns: &[Vec<Complex64>]) -> Result<Self, ChannelError> {
        let k = columns.len();
        let m = columns.first().map_or(0, Vec::len);
        if m == 0 || k == 0 {
            return Err(ChannelError::InvalidDimensions { m, k });
        }
        for col in columns {
            if col.len() != m {
                return Err(ChannelError::DimensionMismatch {
                    what: "column length",
                    expected: m,
                    found: col.len(),
                });
            }
        }
        let h = DMatrix::from_iterator(m, k, columns.iter().flatten().cloned());
        Self::new(h, ChannelSource::Inline)
    }

    /// Convenience constructor from real-valued columns.
    pub fn from_real_columns(columns: &[Vec<f64>]) -> Result<Self, ChannelError> {
        let cols: Vec<Vec<Complex64>> = columns
            .iter()
            .map(|c| c.iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect();
        Self::from_columns(&cols)
    }

    pub fn antennas(&self) -> usize {
        self.h.nrows()
    }

    pub fn users(&self) -> usize {
        self.h.ncols()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.h
    }

    pub fn source(&self) -> &ChannelSource {
        &self.source
    }

    /// Channel of user `k` as a contiguous slice.
    pub fn column(&self, k: usize) -> &[Complex64] {
        let m = self.antennas();
        &self.h.as_slice()[k * m..(k + 1) * m]
    }

    pub fn norm(&self, k: usize) -> f64 {
        norm_sqr(self.column(k)).sqrt()
    }

    /// `H^H H`, computed once and cached.
    pub fn gram(&self) -> &CMatrix {
        self.gram.get_or_init(|| self.h.adjoint() * &self.h)
    }

    /// Sub-channel set restricted to `users`, in the given order. The Gram
    /// matrix is sliced from this set's rather than recomputed.
    pub fn select(&self, users: &[usize]) -> ChannelSet {
        let g = self.gram();
        let gram = OnceLock::new();
        let _ = gram.set(CMatrix::from_fn(users.len(), users.len(), |i, j| g[(users[i], users[j])]));
        ChannelSet {
            h: self.h.select_columns(users.iter()),
            source: self.source.clone(),
            gram,
        }
    }

    pub fn to_file(&self) -> ChannelFile {
        ChannelFile {
            m: self.antennas(),
            k: self.users(),
            columns: (0..self.users())
                .map(|k| self.column(k).iter().map(|x| [x.re, x.im]).collect())
                .collect(),
        }
    }

    pub fn from_file(file: &ChannelFile, source: ChannelSource) -> Result<Self, ChannelError> {
        if file.m == 0 || file.k == 0 {
            return Err(ChannelError::InvalidDimensions { m: file.m, k: file.k });
        }
        if file.columns.len() != file.k {
            return Err(ChannelError::DimensionMismatch {
                what: "number of columns vs K",
                expected: file.k,
                found: file.columns.len(),
            });
        }
        for col in &file.columns {
            if col.len() != file.m {
                return Err(ChannelError::DimensionMismatch {
                    what: "column length vs M",
                    expected: file.m,
                    found: col.len(),
                });
            }
        }
        let h = DMatrix::from_iterator(
            file.m,
            file.k,
            file.columns
                .iter()
                .flatten()
                .map(|&[re, im]| Complex64::new(re, im)),
        );
        Self::new(h, source)
    }
}

/// On-disk channel format: `{"M": int, "K": int, "columns": [[[re, im]; M]; K]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelFile {
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "K")]
    pub k: usize,
    pub columns: Vec<Vec<[f64; 2]>>,
}

/// Draws i.i.d. circularly-symmetric complex Gaussian entries with the given
/// per-entry variance, column by column from a ChaCha8 stream seeded by `seed`.
pub fn generate_iid(seed: u64, m: usize, k: usize, variance: f64) -> Result<ChannelSet, ChannelError> {
    if m == 0 || k == 0 {
        return Err(ChannelError::InvalidDimensions { m, k });
    }
    if !(variance > 0.0 && variance.is_finite()) {
        return Err(ChannelError::InvalidVariance(variance));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = (variance / 2.0).sqrt();
    let h = DMatrix::from_fn(m, k, |_, _| {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        Complex64::new(re * scale, im * scale)
    });
    // from_fn fills column-major, so the draw order is column by column.
    ChannelSet::new(h, ChannelSource::Seed { seed, variance })
}

pub fn load_channels(path: impl AsRef<Path>) -> Result<ChannelSet, ChannelError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| ChannelError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let file: ChannelFile = serde_json::from_str(&text).map_err(|source| ChannelError::Parse {
        path: path.to_path_buf(),
        source,
    })?;
    ChannelSet::from_file(
        &file,
        ChannelSource::File {
            path: path.to_path_buf(),
        },
    )
}

pub fn save_channels(channels: &ChannelSet, path: impl AsRef<Path>) -> Result<(), ChannelError> {
    let path = path.as_ref();
    let text = serde_json::to_string(&channels.to_file()).expect("channel file serializes");
    fs::write(path, text).map_err(|source| ChannelError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Partition of users into maximal groups of mutually collinear channels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollinearGroups {
    /// Groups ordered by their smallest member; members sorted ascending.
    pub groups: Vec<Vec<usize>>,
    /// Per group, the member with the lowest channel norm (lowest index on ties).
    pub representatives: Vec<usize>,
    pub tolerance: f64,
}

impl CollinearGroups {
    /// Users kept active after dropping every non-representative, ascending.
    pub fn kept_users(&self) -> Vec<usize> {
        let mut kept = self.representatives.clone();
        kept.sort_unstable();
        kept
    }

    /// `(dropped user, representative)` pairs, ordered by dropped user.
    pub fn dropped(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = self
            .groups
            .iter()
            .zip(&self.representatives)
            .flat_map(|(g, &rep)| g.iter().filter(move |&&u| u != rep).map(move |&u| (u, rep)))
            .collect();
        out.sort_unstable();
        out
    }

    pub fn has_collinear(&self) -> bool {
        self.groups.iter().any(|g| g.len() > 1)
    }
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Groups users whose channels satisfy `|h_i^H h_j| ≥ (1 − tol)‖h_i‖‖h_j‖`,
/// closing the relation transitively (union-find over all pairs).
pub fn detect_collinear(channels: &ChannelSet, tolerance: f64) -> Result<CollinearGroups, ChannelError> {
    if !(tolerance > 0.0 && tolerance < 1.0) {
        return Err(ChannelError::InvalidTolerance(tolerance));
    }
    let k = channels.users();
    let norms: Vec<f64> = (0..k).map(|u| channels.norm(u)).collect();
    let mut parent: Vec<usize> = (0..k).collect();
    for i in 0..k {
        for j in i + 1..k {
            let cross = inner(channels.column(i), channels.column(j)).norm();
            if cross >= (1.0 - tolerance) * norms[i] * norms[j] {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; k];
    for u in 0..k {
        let root = find(&mut parent, u);
        if slot[root] == usize::MAX {
            slot[root] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[root]].push(u);
    }
    let representatives = groups
        .iter()
        .map(|g| {
            *g.iter()
                .min_by(|&&a, &&b| norms[a].total_cmp(&norms[b]).then(a.cmp(&b)))
                .expect("groups are non-empty")
        })
        .collect();
    Ok(CollinearGroups {
        groups,
        representatives,
        tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn generation_is_deterministic_and_scales() {
        let a = generate_iid(7, 4, 2, 1.0).unwrap();
        let b = generate_iid(7, 4, 2, 1.0).unwrap();
        assert_eq!(a.matrix(), b.matrix());
        let c = generate_iid(7, 4, 2, 4.0).unwrap();
        for (x, y) in a.matrix().iter().zip(c.matrix().iter()) {
            assert_eq!(*x * 2.0, *y);
        }
        assert_ne!(a.matrix(), generate_iid(8, 4, 2, 1.0).unwrap().matrix());
    }

    #[test]
    fn generator_second_moment() {
        // 10^6 entries: standard error of the |x|^2 mean is 1e-3.
        let h = generate_iid(7, 1000, 1000, 1.0).unwrap();
        let mean = h.matrix().iter().map(|x| x.norm_sqr()).sum::<f64>() / 1e6;
        assert!((mean - 1.0).abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn invalid_generation_inputs() {
        assert!(matches!(
            generate_iid(1, 0, 2, 1.0),
            Err(ChannelError::InvalidDimensions { .. })
        ));
        assert!(matches!(
            generate_iid(1, 2, 2, 0.0),
            Err(ChannelError::InvalidVariance(_))
        ));
    }

    #[test]
    fn zero_column_rejected() {
        let err = ChannelSet::from_real_columns(&[vec![1.0, 0.0], vec![0.0, 0.0]]).unwrap_err();
        assert!(matches!(err, ChannelError::ZeroChannel { user: 1 }));
        assert!(err.to_string().contains("zero channel"));
    }

    #[test]
    fn file_errors_are_distinct() {
        let dir = tempfile::tempdir().unwrap();
        let bad = dir.path().join("bad.json");
        fs::write(&bad, "{\"M\": 2, \"K\": ").unwrap();
        assert!(matches!(load_channels(&bad), Err(ChannelError::Parse { .. })));

        let mismatch = dir.path().join("mismatch.json");
        fs::write(&mismatch, r#"{"M": 2, "K": 2, "columns": [[[1,0],[0,0]]]}"#).unwrap();
        assert!(matches!(
            load_channels(&mismatch),
            Err(ChannelError::DimensionMismatch { .. })
        ));

        let zero = dir.path().join("zero.json");
        fs::write(&zero, r#"{"M": 2, "K": 2, "columns": [[[1,0],[0,0]], [[0,0],[0,0]]]}"#).unwrap();
        assert!(matches!(load_channels(&zero), Err(ChannelError::ZeroChannel { user: 1 })));

        assert!(matches!(
            load_channels(dir.path().join("missing.json")),
            Err(ChannelError::Io { .. })
        ));
    }

    #[test]
    fn identity_file_loads() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("id.json");
        fs::write(&p, r#"{"M": 2, "K": 2, "columns": [[[1,0],[0,0]], [[0,0],[1,0]]]}"#).unwrap();
        let h = load_channels(&p).unwrap();
        assert_eq!((h.antennas(), h.users()), (2, 2));
        assert_eq!(h.column(0), &[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]);
        assert_eq!(h.column(1), &[Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]);
    }

    #[test]
    fn save_load_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("h.json");
        let h = generate_iid(7, 4, 2, 1.0).unwrap();
        save_channels(&h, &p).unwrap();
        let back = load_channels(&p).unwrap();
        assert_eq!(h.matrix(), back.matrix());
    }

    #[test]
    fn orthogonal_channels_are_singletons() {
        let h = ChannelSet::from_real_columns(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let g = detect_collinear(&h, DEFAULT_COLLINEAR_TOL).unwrap();
        assert_eq!(g.groups, vec![vec![0], vec![1]]);
        assert!(!g.has_collinear());
    }

    #[test]
    fn scaled_copy_keeps_lowest_norm() {
        let h = ChannelSet::from_real_columns(&[vec![3.0, 0.0], vec![1.0, 0.0]]).unwrap();
        let g = detect_collinear(&h, DEFAULT_COLLINEAR_TOL).unwrap();
        assert_eq!(g.groups, vec![vec![0, 1]]);
        assert_eq!(g.representatives, vec![1]);
        assert_eq!(g.dropped(), vec![(0, 1)]);
        assert_eq!(g.kept_users(), vec![1]);
    }

    #[test]
    fn phase_rotated_copy_is_collinear() {
        let rot = Complex64::from_polar(1.0, PI / 3.0);
        let h = ChannelSet::from_columns(&[
            vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
            vec![rot * 2.0, Complex64::new(0.0, 0.0)],
        ])
        .unwrap();
        let g = detect_collinear(&h, DEFAULT_COLLINEAR_TOL).unwrap();
        assert_eq!(g.groups, vec![vec![0, 1]]);
        assert_eq!(g.representatives, vec![0]);
    }

    #[test]
    fn tolerance_precondition() {
        let h = ChannelSet::from_real_columns(&[vec![1.0]]).unwrap();
        assert!(detect_collinear(&h, 0.0).is_err());
        assert!(detect_collinear(&h, 1.0).is_err());
    }
}
