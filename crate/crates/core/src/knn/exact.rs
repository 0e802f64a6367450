use rayon::prelude::*;

use super::{KnnResult, Scored};
use crate::distance::distance;
use crate::error::{Error, Result};
use crate::model::{DataMatrix, Metric};

/// Exact k nearest neighbors by scanning every pair. Ties are broken by the
/// lower point index. Quadratic; meant for datasets up to a few tens of
/// thousands of rows.
pub fn exact_knn(data: &DataMatrix, k: usize, metric: Metric) -> Result<KnnResult> {
    let n = data.rows();
    if k >= n {
        return Err(Error::TooManyNeighbors { k, n });
    }
    if k == 0 {
        return KnnResult::from_parts(n, 0, Vec::new(), Vec::new());
    }
    let rows: Vec<Vec<Scored>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let q = data.row(i);
            let mut all: Vec<Scored> = (0..n)
                .filter(|&j| j != i)
                .map(|j| Scored {
                    dist: distance(metric, q, data.row(j)),
                    idx: j,
                })
                .collect();
            all.select_nth_unstable(k - 1);
            all.truncate(k);
            all.sort_unstable();
            all
        })
        .collect();

    let mut neighbors = Vec::with_capacity(n * k);
    let mut distances = Vec::with_capacity(n * k);
    for row in rows {
        for s in row {
            neighbors.push(s.idx);
            distances.push(s.dist);
        }
    }
    KnnResult::from_parts(n, k, neighbors, distances)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(xs: &[f64]) -> DataMatrix {
        DataMatrix::new(xs.len(), 1, xs.to_vec()).unwrap()
    }

    #[test]
    fn collinear_k2() {
        let r = exact_knn(&line(&[0.0, 1.0, 3.0]), 2, Metric::Euclidean).unwrap();
        assert_eq!(r.neighbors(0), &[1, 2]);
        assert_eq!(r.distances(0), &[1.0, 9.0]);
    }

    #[test]
    fn collinear_k1() {
        let r = exact_knn(&line(&[0.0, 1.0, 3.0]), 1, Metric::Euclidean).unwrap();
        let firsts: Vec<usize> = (0..3).map(|i| r.neighbors(i)[0]).collect();
        assert_eq!(firsts, vec![1, 0, 1]);
    }

    #[test]
    fn tie_goes_to_lower_index() {
        // origin is index 1, equidistant from 0 (at -1) and 2 (at +1)
        let r = exact_knn(&line(&[-1.0, 0.0, 1.0]), 1, Metric::Euclidean).unwrap();
        assert_eq!(r.neighbors(1), &[0]);
        let r = exact_knn(&line(&[1.0, 0.0, -1.0]), 1, Metric::Euclidean).unwrap();
        assert_eq!(r.neighbors(1), &[0]);
    }

    #[test]
    fn duplicates_find_each_other() {
        let d = DataMatrix::from_rows(&[[1.0, 1.0], [5.0, 5.0], [1.0, 1.0]]).unwrap();
        let r = exact_knn(&d, 1, Metric::Euclidean).unwrap();
        assert_eq!(r.neighbors(0), &[2]);
        assert_eq!(r.neighbors(2), &[0]);
        assert_eq!(r.distances(0), &[0.0]);
    }

    #[test]
    fn k_must_be_below_n() {
        let err = exact_knn(&line(&[0.0, 1.0]), 2, Metric::Euclidean).unwrap_err();
        assert!(matches!(err, Error::TooManyNeighbors { k: 2, n: 2 }));
    }
}
