use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{BankError, Result};

/// Result of Lloyd's algorithm over a set of vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterAssignment {
    /// Cluster index of every input vector.
    pub assignment: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    /// `k` as requested; `centroids.len()` may be smaller when clamped to the point count.
    pub requested_k: usize,
    pub iterations: usize,
    pub converged: bool,
    /// Inertia after every assignment step, in order.
    pub inertia_history: Vec<f64>,
    /// Number of times an empty cluster was re-seeded.
    pub reseeded: usize,
}

impl ClusterAssignment {
    pub fn k(&self) -> usize {
        self.centroids.len()
    }

    pub fn inertia(&self) -> f64 {
        self.inertia_history.last().copied().unwrap_or(0.0)
    }

    pub fn members(&self, cluster: usize) -> impl Iterator<Item = usize> + '_ {
        self.assignment
            .iter()
            .enumerate()
            .filter(move |(_, &c)| c == cluster)
            .map(|(i, _)| i)
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k()];
        for &c in &self.assignment {
            sizes[c] += 1;
        }
        sizes
    }
}

fn sq_dist(a: &[f32], c: &[f64]) -> f64 {
    a.iter()
        .zip(c)
        .map(|(&x, &y)| {
            let d = x as f64 - y;
            d * d
        })
        .sum()
}

fn to_f64(v: &[f32]) -> Vec<f64> {
    v.iter().map(|&x| x as f64).collect()
}

/// k-means++ seeding: the first center uniformly, then each next center with probability
/// proportional to its squared distance from the nearest chosen center.
fn seed_centers<V: AsRef<[f32]>>(vectors: &[V], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = vectors.len();
    let mut chosen = vec![false; n];
    let first = rng.random_range(0..n);
    chosen[first] = true;
    let mut centers = vec![to_f64(vectors[first].as_ref())];
    let mut d2: Vec<f64> = vectors
        .iter()
        .map(|v| sq_dist(v.as_ref(), &centers[0]))
        .collect();

    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (i, &d) in d2.iter().enumerate() {
                if d <= 0.0 {
                    continue;
                }
                acc += d;
                pick = Some(i);
                if acc > target {
                    break;
                }
            }
            pick.expect("positive total weight has a positive entry")
        } else {
            // every remaining point coincides with a center
            (0..n).find(|&i| !chosen[i]).expect("k <= n")
        };
        chosen[next] = true;
        let c = to_f64(vectors[next].as_ref());
        for (d, v) in d2.iter_mut().zip(vectors) {
            *d = d.min(sq_dist(v.as_ref(), &c));
        }
        centers.push(c);
    }
    centers
}

/// Nearest-centroid assignment (ties go to the lowest index). Returns inertia.
fn assign<V: AsRef<[f32]>>(vectors: &[V], centroids: &[Vec<f64>], out: &mut [usize]) -> f64 {
    let mut inertia = 0.0;
    for (slot, v) in out.iter_mut().zip(vectors) {
        let mut best = (0, f64::INFINITY);
        for (j, c) in centroids.iter().enumerate() {
            let d = sq_dist(v.as_ref(), c);
            if d < best.1 {
                best = (j, d);
            }
        }
        *slot = best.0;
        inertia += best.1;
    }
    inertia
}

/// Recomputes centroids as member means. Empty clusters take the point farthest from its
/// own centroid. Returns the number of re-seeded clusters.
fn update<V: AsRef<[f32]>>(
    vectors: &[V],
    assignment: &[usize],
    centroids: &mut [Vec<f64>],
    reseed_empty: bool,
) -> usize {
    let k = centroids.len();
    let q = centroids[0].len();
    let mut sums = vec![vec![0.0f64; q]; k];
    let mut counts = vec![0usize; k];
    for (v, &c) in vectors.iter().zip(assignment) {
        counts[c] += 1;
        for (s, &x) in sums[c].iter_mut().zip(v.as_ref()) {
            *s += x as f64;
        }
    }
    for j in 0..k {
        if counts[j] > 0 {
            let n = counts[j] as f64;
            centroids[j] = sums[j].iter().map(|s| s / n).collect();
        }
    }
    if !reseed_empty {
        return 0;
    }
    let mut used = vec![false; vectors.len()];
    let mut reseeded = 0;
    for j in 0..k {
        if counts[j] > 0 {
            continue;
        }
        let far = vectors
            .iter()
            .enumerate()
            .filter(|(i, _)| !used[*i])
            .map(|(i, v)| (i, sq_dist(v.as_ref(), &centroids[assignment[i]])))
            .fold(None::<(usize, f64)>, |best, cur| match best {
                Some(b) if b.1 >= cur.1 => Some(b),
                _ => Some(cur),
            });
        if let Some((i, _)) = far {
            used[i] = true;
            centroids[j] = to_f64(vectors[i].as_ref());
            reseeded += 1;
        }
    }
    reseeded
}

/// Lloyd's algorithm with k-means++ seeding and Euclidean distance.
///
/// `k` is clamped to the number of vectors. Iteration stops when an assignment step
/// changes nothing or after `max_iter` update steps; in the latter case the centroids
/// are refreshed once more so every non-empty cluster's centroid is its member mean.
pub fn kmeans<V: AsRef<[f32]>>(
    vectors: &[V],
    k: usize,
    seed: u64,
    max_iter: usize,
) -> Result<ClusterAssignment> {
    if k == 0 {
        return Err(BankError::InvalidArgument("k must be at least 1".into()));
    }
    let n = vectors.len();
    if n == 0 {
        return Err(BankError::Empty("k-means input"));
    }
    let q = vectors[0].as_ref().len();
    for v in vectors {
        if v.as_ref().len() != q {
            return Err(BankError::DimensionMismatch {
                what: "k-means input vector",
                expected: q,
                found: v.as_ref().len(),
            });
        }
    }
    let k_eff = k.min(n);
    if k_eff < k {
        log::debug!("k-means: k={k} clamped to {n} points");
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = seed_centers(vectors, k_eff, &mut rng);
    let mut assignment = vec![0usize; n];
    let mut inertia_history = vec![assign(vectors, &centroids, &mut assignment)];
    let mut next = assignment.clone();
    let mut converged = false;
    let mut iterations = 0;
    let mut reseeded = 0;

    while iterations < max_iter {
        iterations += 1;
        reseeded += update(vectors, &assignment, &mut centroids, true);
        inertia_history.push(assign(vectors, &centroids, &mut next));
        if next == assignment {
            converged = true;
            break;
        }
        std::mem::swap(&mut assignment, &mut next);
    }
    if !converged {
        update(vectors, &assignment, &mut centroids, false);
        let inertia: f64 = vectors
            .iter()
            .zip(&assignment)
            .map(|(v, &c)| sq_dist(v.as_ref(), &centroids[c]))
            .sum();
        inertia_history.push(inertia);
    }

    Ok(ClusterAssignment {
        assignment,
        centroids,
        requested_k: k,
        iterations,
        converged,
        inertia_history,
        reseeded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blobs(seed: u64, per_blob: usize) -> (Vec<Vec<f32>>, Vec<usize>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let centers = [[0.0f32, 0.0, 0.0], [10.0, 10.0, 10.0]];
        let mut pts = Vec::new();
        let mut labels = Vec::new();
        for (b, c) in centers.iter().enumerate() {
            for _ in 0..per_blob {
                pts.push(c.iter().map(|x| x + rng.random_range(-0.5..0.5)).collect());
                labels.push(b);
            }
        }
        (pts, labels)
    }

    #[test]
    fn single_cluster_is_global_mean() {
        let pts = vec![vec![1.0f32, 0.0], vec![3.0, 2.0], vec![5.0, -2.0]];
        let ca = kmeans(&pts, 1, 0, 100).unwrap();
        assert_eq!(ca.assignment, vec![0, 0, 0]);
        assert!((ca.centroids[0][0] - 3.0).abs() < 1e-12);
        assert!(ca.centroids[0][1].abs() < 1e-12);
        assert!(ca.converged);
    }

    #[test]
    fn k_equal_to_count_gives_zero_inertia() {
        let pts = vec![vec![1.0f32, 0.0], vec![3.0, 2.0], vec![5.0, -2.0], vec![0.0, 9.0]];
        let ca = kmeans(&pts, 4, 3, 100).unwrap();
        assert_eq!(ca.inertia(), 0.0);
        let mut seen = ca.assignment.clone();
        seen.sort_unstable();
        assert_eq!(seen, vec![0, 1, 2, 3]);
    }

    #[test]
    fn k_clamped_to_count() {
        let pts = vec![vec![1.0f32], vec![2.0]];
        let ca = kmeans(&pts, 5, 0, 10).unwrap();
        assert_eq!(ca.k(), 2);
        assert_eq!(ca.requested_k, 5);
    }

    #[test]
    fn duplicate_points_do_not_break_seeding() {
        let pts = vec![vec![1.0f32, 1.0]; 4];
        let ca = kmeans(&pts, 3, 9, 10).unwrap();
        assert_eq!(ca.k(), 3);
        assert_eq!(ca.inertia(), 0.0);
    }

    #[test]
    fn two_blobs_recovered() {
        let (pts, labels) = blobs(1, 20);
        let ca = kmeans(&pts, 2, 42, 100).unwrap();
        let flip = ca.assignment[0] != labels[0];
        for (a, l) in ca.assignment.iter().zip(&labels) {
            assert_eq!(*a == 1, (*l == 1) != flip);
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let (pts, _) = blobs(2, 15);
        assert_eq!(kmeans(&pts, 3, 5, 50).unwrap(), kmeans(&pts, 3, 5, 50).unwrap());
    }

    #[test]
    fn errors() {
        let empty: Vec<Vec<f32>> = vec![];
        assert!(matches!(kmeans(&empty, 1, 0, 10), Err(BankError::Empty(_))));
        assert!(matches!(kmeans(&[vec![1.0f32]], 0, 0, 10), Err(BankError::InvalidArgument(_))));
        assert!(matches!(
            kmeans(&[vec![1.0f32], vec![1.0, 2.0]], 1, 0, 10),
            Err(BankError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn max_iter_cap_still_yields_member_means() {
        let (pts, _) = blobs(3, 30);
        let ca = kmeans(&pts, 4, 1, 1).unwrap();
        for j in 0..ca.k() {
            let members: Vec<usize> = ca.members(j).collect();
            if members.is_empty() {
                continue;
            }
            for d in 0..3 {
                let mean = members.iter().map(|&i| pts[i][d] as f64).sum::<f64>() / members.len() as f64;
                assert!((mean - ca.centroids[j][d]).abs() < 1e-9);
            }
        }
    }
}
