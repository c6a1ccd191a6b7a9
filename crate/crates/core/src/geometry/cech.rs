use super::alpha::{AlphaFiltration, FiltrationEntry};
use super::{min_enclosing_ball, GeometryError, PointCloud, Simplex, MAX_DIM};

/// Default size limit for exhaustive subset enumeration.
pub const DEFAULT_ORACLE_LIMIT: usize = 12;

fn subset_radii(cloud: &PointCloud, n_max: usize) -> Result<Vec<(u32, f64)>, GeometryError> {
    let n = cloud.len();
    if n > n_max {
        return Err(GeometryError::OracleSizeLimit { n, limit: n_max });
    }
    let mut out = Vec::with_capacity((1usize << n) - 1);
    for mask in 1u32..(1u32 << n) {
        let pts: Vec<&[f64]> = (0..n)
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| cloud.point(i))
            .collect();
        out.push((mask, min_enclosing_ball(&pts)?.radius));
    }
    Ok(out)
}

/// Euler characteristic of the Čech complex of `cloud` at radius `r`.
///
/// Every nonempty subset is a simplex iff the closed `r`-balls around its
/// points share a point, i.e. iff its minimum enclosing ball has radius
/// ≤ `r`. Exponential in `|cloud|`; intended as a test oracle.
pub fn cech_oracle_chi(cloud: &PointCloud, r: f64, n_max: usize) -> Result<i64, GeometryError> {
    if r < 0.0 {
        return Err(GeometryError::NegativeRadius(r));
    }
    Ok(subset_radii(cloud, n_max)?
        .into_iter()
        .filter(|&(_, rad)| rad <= r)
        .map(|(mask, _)| if mask.count_ones() % 2 == 1 { 1 } else { -1 })
        .sum())
}

/// Full Čech filtration of a tiny cloud (at most `MAX_DIM + 1` points after
/// duplicate removal is the intended use), in the same form as an Alpha
/// filtration. Exact duplicates are merged so they count once.
pub fn cech_filtration(cloud: &PointCloud) -> Result<AlphaFiltration, GeometryError> {
    let mut distinct: Vec<usize> = Vec::new();
    for i in 0..cloud.len() {
        if !distinct.iter().any(|&j| cloud.point(j) == cloud.point(i)) {
            distinct.push(i);
        }
    }
    if distinct.len() > MAX_DIM + 1 {
        return Err(GeometryError::OracleSizeLimit {
            n: distinct.len(),
            limit: MAX_DIM + 1,
        });
    }
    let pts: Vec<Vec<f64>> = distinct.iter().map(|&i| cloud.point(i).to_vec()).collect();
    let sub = PointCloud::new(&pts)?;
    let entries = subset_radii(&sub, MAX_DIM + 1)?
        .into_iter()
        .map(|(mask, radius)| {
            let verts: Vec<usize> = (0..distinct.len())
                .filter(|i| mask & (1 << i) != 0)
                .map(|i| distinct[i])
                .collect();
            FiltrationEntry {
                simplex: Simplex::new(&verts),
                radius,
            }
        })
        .collect();
    Ok(AlphaFiltration::from_entries(entries))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cloud(points: &[&[f64]]) -> PointCloud {
        PointCloud::new(&points.iter().map(|p| p.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn single_point() {
        let c = cloud(&[&[1.0, 2.0]]);
        for r in [0.0, 1.0, 100.0] {
            assert_eq!(cech_oracle_chi(&c, r, 12).unwrap(), 1);
        }
    }

    #[test]
    fn two_points() {
        let c = cloud(&[&[0.0, 0.0], &[2.0, 0.0]]);
        assert_eq!(cech_oracle_chi(&c, 0.9, 12).unwrap(), 2);
        assert_eq!(cech_oracle_chi(&c, 1.0, 12).unwrap(), 1);
    }

    #[test]
    fn equilateral_triangle_without_face() {
        let c = cloud(&[&[0.0, 0.0], &[2.0, 0.0], &[1.0, 3f64.sqrt()]]);
        assert_eq!(cech_oracle_chi(&c, 1.05, 12).unwrap(), 0);
        assert_eq!(cech_oracle_chi(&c, 1.2, 12).unwrap(), 1);
    }

    #[test]
    fn size_limit() {
        let pts: Vec<Vec<f64>> = (0..13).map(|i| vec![i as f64, 0.0]).collect();
        let c = PointCloud::new(&pts).unwrap();
        assert_eq!(
            cech_oracle_chi(&c, 1.0, 12).unwrap_err(),
            GeometryError::OracleSizeLimit { n: 13, limit: 12 }
        );
    }

    #[test]
    fn filtration_merges_duplicates() {
        let c = cloud(&[&[0.0, 0.0], &[0.0, 0.0], &[2.0, 0.0]]);
        let f = cech_filtration(&c).unwrap();
        assert_eq!(f.len(), 3);
        assert_eq!(f.euler_characteristic(0.5), 2);
        assert_eq!(f.euler_characteristic(1.0), 1);
    }
}
