use super::{dist2, GeometryError, Point};

/// Relative slack used when testing whether a point lies in a ball.
const CONTAIN_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Ball {
    pub center: Point,
    pub radius: f64,
}

impl Ball {
    pub fn contains(&self, p: &[f64]) -> bool {
        let r = self.radius * (1.0 + CONTAIN_TOL);
        dist2(self.center.coords(), p) <= r * r
    }
}

/// Smallest ball whose boundary passes through every point in `pts`, with
/// its center in their affine hull (the "smallest circumsphere").
///
/// Returns `None` when the points are affinely dependent to working
/// precision.
pub fn circumball(pts: &[&[f64]]) -> Option<Ball> {
    let a0 = pts.first()?;
    let d = a0.len();
    let k = pts.len() - 1;
    if k == 0 {
        return Some(Ball {
            center: Point(a0.to_vec()),
            radius: 0.0,
        });
    }
    if k > d {
        return None;
    }
    // Solve G λ = b with G_ij = e_i·e_j, b_i = |e_i|²/2, e_i = a_i − a_0.
    let e: Vec<Vec<f64>> = pts[1..]
        .iter()
        .map(|a| a.iter().zip(a0.iter()).map(|(x, y)| x - y).collect())
        .collect();
    let mut g = [[0.0f64; 5]; 4];
    let mut scale = 0.0f64;
    for i in 0..k {
        for j in 0..k {
            g[i][j] = e[i].iter().zip(&e[j]).map(|(x, y)| x * y).sum();
        }
        g[i][k] = 0.5 * g[i][i];
        scale = scale.max(g[i][i]);
    }
    let lambda = solve(&mut g, k, scale)?;
    let mut center = a0.to_vec();
    for (l, ei) in lambda.iter().zip(&e) {
        for (c, x) in center.iter_mut().zip(ei) {
            *c += l * x;
        }
    }
    let radius = pts
        .iter()
        .map(|p| dist2(&center, p))
        .fold(0.0f64, f64::max)
        .sqrt();
    radius.is_finite().then_some(Ball {
        center: Point(center),
        radius,
    })
}

/// Gaussian elimination on the augmented `k × (k+1)` system.
fn solve(g: &mut [[f64; 5]; 4], k: usize, scale: f64) -> Option<Vec<f64>> {
    for col in 0..k {
        let piv = (col..k).max_by(|&a, &b| g[a][col].abs().total_cmp(&g[b][col].abs()))?;
        if g[piv][col].abs() <= 1e-14 * scale {
            return None;
        }
        g.swap(piv, col);
        for row in 0..k {
            if row != col {
                let f = g[row][col] / g[col][col];
                for c in col..=k {
                    g[row][c] -= f * g[col][c];
                }
            }
        }
    }
    Some((0..k).map(|i| g[i][k] / g[i][i]).collect())
}

/// Ball of a Welzl support set. Degenerate supports (affinely dependent to
/// working precision) fall back to the smallest circumball of a subset that
/// still covers the whole support.
fn support_ball(support: &[&[f64]], dim: usize) -> Ball {
    if support.is_empty() {
        return Ball {
            center: Point(vec![0.0; dim]),
            radius: -1.0,
        };
    }
    if let Some(b) = circumball(support) {
        return b;
    }
    let n = support.len();
    let mut best: Option<Ball> = None;
    for mask in 1u32..(1 << n) - 1 {
        let sub: Vec<&[f64]> = (0..n)
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| support[i])
            .collect();
        if let Some(b) = circumball(&sub) {
            if support.iter().all(|p| b.contains(p))
                && best.as_ref().is_none_or(|cur| b.radius < cur.radius)
            {
                best = Some(b);
            }
        }
    }
    best.expect("a two-point subset always yields a covering ball")
}

fn welzl<'a>(pts: &[&'a [f64]], support: &mut Vec<&'a [f64]>, dim: usize) -> Ball {
    if pts.is_empty() || support.len() == dim + 1 {
        return support_ball(support, dim);
    }
    let (last, rest) = pts.split_last().unwrap();
    let ball = welzl(rest, support, dim);
    if ball.radius >= 0.0 && ball.contains(last) {
        return ball;
    }
    support.push(last);
    let ball = welzl(rest, support, dim);
    support.pop();
    ball
}

/// Minimum enclosing ball by Welzl's recursion, processing points in input
/// order (no shuffling, so the result is fully deterministic).
pub fn min_enclosing_ball(points: &[&[f64]]) -> Result<Ball, GeometryError> {
    let dim = points.first().ok_or(GeometryError::EmptyPointSet)?.len();
    if let Some(p) = points.iter().find(|p| p.len() != dim) {
        return Err(GeometryError::MixedDimensions {
            expected: dim,
            found: p.len(),
        });
    }
    let mut support = Vec::with_capacity(dim + 1);
    Ok(welzl(points, &mut support, dim))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn two_point_diameter() {
        let b = min_enclosing_ball(&[&[0.0, 0.0], &[2.0, 0.0]]).unwrap();
        assert_relative_eq!(b.center.0[0], 1.0);
        assert_relative_eq!(b.center.0[1], 0.0);
        assert_relative_eq!(b.radius, 1.0);
    }

    #[test]
    fn equilateral_triangle() {
        let h = 3f64.sqrt();
        let b = min_enclosing_ball(&[&[0.0, 0.0], &[2.0, 0.0], &[1.0, h]]).unwrap();
        assert_relative_eq!(b.radius, 2.0 / 3f64.sqrt(), epsilon = 1e-12);
        assert_relative_eq!(b.radius, 1.154701, epsilon = 1e-6);
    }

    #[test]
    fn obtuse_triangle_uses_long_side() {
        let b = min_enclosing_ball(&[&[0.0, 0.0], &[4.0, 0.0], &[1.0, 0.1]]).unwrap();
        assert_relative_eq!(b.radius, 2.0, epsilon = 1e-12);
        assert_relative_eq!(b.center.0[0], 2.0, epsilon = 1e-12);
        assert_relative_eq!(b.center.0[1], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn single_point_and_duplicates() {
        let b = min_enclosing_ball(&[&[3.0, 4.0, 5.0]]).unwrap();
        assert_eq!(b.radius, 0.0);
        let b = min_enclosing_ball(&[&[1.0, 1.0], &[1.0, 1.0], &[3.0, 1.0]]).unwrap();
        assert_relative_eq!(b.radius, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn collinear_support_falls_back() {
        let b = min_enclosing_ball(&[&[0.0, 0.0], &[1.0, 0.0], &[2.0, 0.0], &[0.5, 0.0]]).unwrap();
        assert_relative_eq!(b.radius, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn errors() {
        assert_eq!(
            min_enclosing_ball(&[]).unwrap_err(),
            GeometryError::EmptyPointSet
        );
        assert!(matches!(
            min_enclosing_ball(&[&[0.0, 0.0], &[0.0, 0.0, 0.0]]),
            Err(GeometryError::MixedDimensions { .. })
        ));
    }

    #[test]
    fn circumball_of_right_triangle_is_hypotenuse_ball() {
        let b = circumball(&[&[0.0, 0.0, 0.0], &[2.0, 0.0, 0.0], &[0.0, 2.0, 0.0]]).unwrap();
        assert_relative_eq!(b.radius, 2f64.sqrt(), epsilon = 1e-12);
        assert!(circumball(&[&[0.0, 0.0], &[1.0, 0.0], &[2.0, 0.0]]).is_none());
    }
}
