use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::mesh::{DiscMesh, ScalarField};
use crate::operators::VectorField;

/// Region size above which exhaustive pair scans are refused.
pub const ALL_PAIRS_LIMIT: usize = 5000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HolderSampling {
    AllPairs,
    Random { count: usize, seed: u64 },
    /// All pairs up to [`ALL_PAIRS_LIMIT`] region nodes, random pairs above.
    Auto { count: usize, seed: u64 },
}

#[derive(Debug, Clone, Copy)]
pub enum FieldView<'a> {
    Scalar(&'a ScalarField),
    Vector(&'a VectorField),
}

impl<'a> From<&'a ScalarField> for FieldView<'a> {
    fn from(f: &'a ScalarField) -> Self {
        FieldView::Scalar(f)
    }
}

impl<'a> From<&'a VectorField> for FieldView<'a> {
    fn from(f: &'a VectorField) -> Self {
        FieldView::Vector(f)
    }
}

impl FieldView<'_> {
    fn mesh(&self) -> &DiscMesh {
        match self {
            FieldView::Scalar(f) => f.mesh(),
            FieldView::Vector(v) => v.mesh(),
        }
    }

    /// Largest component-wise difference between two nodes.
    fn diff(&self, a: usize, b: usize) -> f64 {
        match self {
            FieldView::Scalar(f) => (f.get(a) - f.get(b)).abs(),
            FieldView::Vector(v) => v
                .at(a)
                .iter()
                .zip(v.at(b))
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HolderReport {
    pub alpha: f64,
    pub seminorm: f64,
    pub region_radius: f64,
    /// `None` for exhaustive scans.
    pub seed: Option<u64>,
    pub pairs: usize,
}

/// `sup |v(x) - v(y)| / |x - y|^α` over node pairs in `B_{r0}(0)`.
pub fn holder_seminorm<'a>(
    field: impl Into<FieldView<'a>>,
    alpha: f64,
    region_radius: f64,
    sampling: HolderSampling,
) -> Result<HolderReport> {
    let field = field.into();
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidArg(format!("Hölder exponent must lie in (0, 1], got {alpha}")));
    }
    let mesh = field.mesh();
    let origin = vec![0.0; mesh.dim()];
    mesh.check_region(&origin, region_radius)?;
    let nodes = mesh.nodes_within(&origin, region_radius);
    if nodes.len() < 2 {
        return Err(Error::EmptyRegion(region_radius));
    }
    let pos: Vec<[f64; 3]> = nodes.iter().map(|&k| mesh.position(k)).collect();
    let dist = |i: usize, j: usize| -> f64 {
        pos[i]
            .iter()
            .zip(&pos[j])
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    };
    let ratio = |i: usize, j: usize| field.diff(nodes[i], nodes[j]) / dist(i, j).powf(alpha);

    let sampling = match sampling {
        HolderSampling::Auto { count, seed } if nodes.len() > ALL_PAIRS_LIMIT => HolderSampling::Random { count, seed },
        HolderSampling::Auto { .. } => HolderSampling::AllPairs,
        s => s,
    };
    let (seminorm, pairs, seed) = match sampling {
        HolderSampling::AllPairs => {
            if nodes.len() > ALL_PAIRS_LIMIT {
                return Err(Error::InvalidArg(format!(
                    "{} region nodes exceed the exhaustive-scan limit {ALL_PAIRS_LIMIT}",
                    nodes.len()
                )));
            }
            let mut best = 0.0f64;
            for i in 0..nodes.len() {
                for j in (i + 1)..nodes.len() {
                    best = best.max(ratio(i, j));
                }
            }
            (best, nodes.len() * (nodes.len() - 1) / 2, None)
        }
        HolderSampling::Random { count, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut best = 0.0f64;
            let mut drawn = 0;
            while drawn < count {
                let i = rng.gen_range(0..nodes.len());
                let j = rng.gen_range(0..nodes.len());
                if i == j {
                    continue;
                }
                best = best.max(ratio(i, j));
                drawn += 1;
            }
            (best, count, Some(seed))
        }
        HolderSampling::Auto { .. } => unreachable!("resolved above"),
    };
    Ok(HolderReport {
        alpha,
        seminorm,
        region_radius,
        seed,
        pairs,
    })
}
