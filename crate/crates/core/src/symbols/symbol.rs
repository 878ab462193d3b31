use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::{Complex, Complex64};
use num_traits::Zero;
use rayon::prelude::*;

use crate::cones::{cone_g0, hn_membership_in, ConeSampling};
use crate::error::{Error, Result};
use crate::frame::{Frame, Point};
use crate::lie::HallBasis;
use crate::rational::{q, qi, Q};

use super::ncpoly::NCPoly;
use super::rep::{dpi, interior_size, Representation, SymbolOperator};

fn generator_images(rep: &Representation, hall: &HallBasis) -> Result<Vec<SymbolOperator>> {
    (0..hall.generators())
        .map(|j| dpi(rep, hall, hall.generator_index(j)))
        .collect()
}

/// `sigma(P, x, pi)`: the top-degree part of `P` frozen at `x`, with the
/// generator images substituted in word order.
pub fn symbol(hall: &HallBasis, p: &NCPoly, x: &Point, rep: &Representation) -> Result<SymbolOperator> {
    if p.generators() != hall.generators() {
        return Err(Error::DimensionMismatch {
            expected: hall.generators(),
            found: p.generators(),
        });
    }
    let top = p.top_part_at(x)?;
    let images = generator_images(rep, hall)?;
    if rep.is_character() {
        let mut total = Complex::new(Q::zero(), Q::zero());
        for (w, c) in top.terms() {
            let mut term = Complex::new(c.re.constant_term(), c.im.constant_term());
            for &g in w {
                match &images[g] {
                    SymbolOperator::Scalar { exact: Some(v), .. } => term *= v.clone(),
                    _ => unreachable!("characters have exact scalar images"),
                }
            }
            total += term;
        }
        return Ok(SymbolOperator::exact_scalar(total));
    }
    let k = rep.dim();
    let mats: Vec<DMatrix<Complex64>> = images.iter().map(|s| s.to_matrix(k)).collect();
    let mut total = DMatrix::<Complex64>::zeros(k, k);
    for (w, c) in top.terms() {
        let coeff = Complex64::new(crate::rational::to_f64(&c.re.constant_term()), crate::rational::to_f64(&c.im.constant_term()));
        let mut prod = DMatrix::<Complex64>::identity(k, k);
        for &g in w {
            prod = &prod * &mats[g];
        }
        total += prod * coeff;
    }
    Ok(SymbolOperator::Matrix(total))
}

/// `|value|` for scalars; otherwise the smallest singular value of the
/// leading `fraction * K` block.
pub fn injectivity_margin(s: &SymbolOperator, fraction: f64) -> f64 {
    match s {
        SymbolOperator::Scalar { value, .. } => value.norm(),
        SymbolOperator::Matrix(m) => {
            let n = interior_size(m.nrows(), fraction);
            let block = m.view((0, 0), (n, n)).into_owned();
            block
                .singular_values()
                .iter()
                .copied()
                .fold(f64::INFINITY, f64::min)
        }
    }
}

/// Largest interior-block entry of `sigma(P) - sigma(Q)` over `reps`.
pub fn presentation_gap(
    hall: &HallBasis,
    p: &NCPoly,
    other: &NCPoly,
    x: &Point,
    reps: &[Representation],
    fraction: f64,
) -> Result<f64> {
    let mut worst = 0.0f64;
    for rep in reps {
        let a = symbol(hall, p, x, rep)?.to_matrix(rep.dim());
        let b = symbol(hall, other, x, rep)?.to_matrix(rep.dim());
        let n = interior_size(rep.dim(), fraction);
        let d = (a - b).view((0, 0), (n, n)).iter().map(|z| z.norm()).fold(0.0, f64::max);
        worst = worst.max(d);
    }
    Ok(worst)
}

/// Unit vectors with rational entries by inverse stereographic projection
/// of a grid in `R^{n-1}`.
pub fn rational_sphere(n: usize, grid: &[Q]) -> Vec<Vec<Q>> {
    if n == 0 {
        return Vec::new();
    }
    if n == 1 {
        return vec![vec![qi(1)], vec![qi(-1)]];
    }
    let mut points = vec![{
        let mut v = vec![qi(0); n];
        v[0] = qi(1);
        v
    }];
    let mut idx = vec![0usize; n - 1];
    loop {
        let u: Vec<Q> = idx.iter().map(|&i| grid[i].clone()).collect();
        let r2 = u.iter().fold(qi(0), |a, c| a + c * c);
        let den = &r2 + qi(1);
        let mut v = vec![(&r2 - qi(1)) / &den];
        v.extend(u.iter().map(|c| c * qi(2) / &den));
        if !points.contains(&v) {
            points.push(v);
        }
        let mut k = 0;
        loop {
            if k == idx.len() {
                return points;
            }
            idx[k] += 1;
            if idx[k] < grid.len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// Unit-scale representation representatives per cone stratum label.
#[derive(Debug, Clone, Default)]
pub struct RepCatalog {
    entries: BTreeMap<String, Vec<Representation>>,
}

impl RepCatalog {
    pub fn new() -> Self {
        RepCatalog::default()
    }

    pub fn insert(&mut self, stratum: impl Into<String>, reps: Vec<Representation>) {
        self.entries.insert(stratum.into(), reps);
    }

    pub fn get(&self, stratum: &str) -> Option<&[Representation]> {
        self.entries.get(stratum).map(Vec::as_slice)
    }

    pub fn strata(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    /// Built-in classification. Abelian algebras: unit characters. The
    /// Heisenberg algebra (two generators, step two): unit characters and
    /// the two Schrodinger representations, for every subalgebra stratum.
    /// Other algebras get an empty catalog.
    pub fn builtin(hall: &HallBasis, k: usize) -> RepCatalog {
        let grid: Vec<Q> = [q(1, 4), q(1, 2), qi(1), qi(2), qi(4)]
            .into_iter()
            .flat_map(|v| [v.clone(), -v])
            .chain([qi(0)])
            .collect();
        let n = hall.generators();
        let chars: Vec<Representation> = rational_sphere(n, &grid)
            .into_iter()
            .map(Representation::character)
            .collect();
        let mut cat = RepCatalog::new();
        if hall.step() == 1 {
            for d in 0..=hall.dim() {
                cat.insert(d.to_string(), chars.clone());
            }
        } else if n == 2 && hall.step() == 2 {
            let mut reps = chars;
            reps.push(Representation::schrodinger(1, k));
            reps.push(Representation::schrodinger(-1, k));
            for label in ["0/0", "1/0", "1/1", "2/1", "3/1"] {
                cat.insert(label, reps.clone());
            }
        }
        cat
    }
}

#[derive(Debug, Clone)]
pub struct HypoOptions {
    pub tol: f64,
    pub interior_fraction: f64,
    pub sampling: ConeSampling,
    /// Tolerance for deciding whether a representation lies in the cone.
    pub membership_tol: f64,
}

impl Default for HypoOptions {
    fn default() -> Self {
        HypoOptions {
            tol: 1e-6,
            interior_fraction: 0.5,
            sampling: ConeSampling {
                closure_elements: Some(Vec::new()),
                ..ConeSampling::default()
            },
            membership_tol: 1e-7,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RepMargin {
    pub rep: String,
    pub margin: f64,
}

#[derive(Debug, Clone)]
pub struct PointVerdict {
    pub point: Point,
    pub strata: Vec<String>,
    /// Catalog representations lying in the cone at the point, with margins.
    pub margins: Vec<RepMargin>,
    /// Catalog representations discarded because they are not in the cone.
    pub excluded: Vec<String>,
    pub min_margin: f64,
    pub hypoelliptic: bool,
}

impl PointVerdict {
    pub fn worst(&self) -> Option<&RepMargin> {
        self.margins.iter().min_by(|a, b| a.margin.total_cmp(&b.margin))
    }
}

#[derive(Debug, Clone)]
pub struct HypoReport {
    pub points: Vec<PointVerdict>,
    pub hypoelliptic: bool,
}

/// Injectivity of the symbol on every catalog representation attached to
/// the cone strata found at each grid point.
pub fn check_max_hypoelliptic(
    frame: &Frame,
    p: &NCPoly,
    grid: &[Point],
    catalog: &RepCatalog,
    opts: &HypoOptions,
) -> Result<HypoReport> {
    let hall = frame.basis();
    let mut points = Vec::new();
    for x in grid {
        let cone = cone_g0(frame, x, &opts.sampling)?;
        let mut strata: Vec<String> = cone.members.iter().map(|m| m.stratum.clone()).collect();
        strata.dedup();
        let mut candidates: Vec<Representation> = Vec::new();
        let mut seen = std::collections::BTreeSet::new();
        for s in &strata {
            let reps = catalog.get(s).ok_or_else(|| Error::UnclassifiedStratum(s.clone()))?;
            for r in reps {
                if seen.insert(r.to_string()) {
                    candidates.push(r.clone());
                }
            }
        }
        let checked: Vec<Result<(String, Option<f64>)>> = candidates
            .par_iter()
            .map(|rep| {
                let inside = match rep.orbit_functional(hall) {
                    Some(xi) => hn_membership_in(hall, &cone, &xi, opts.membership_tol)?.member,
                    None => true,
                };
                if !inside {
                    return Ok((rep.to_string(), None));
                }
                let s = symbol(hall, p, x, rep)?;
                Ok((rep.to_string(), Some(injectivity_margin(&s, opts.interior_fraction))))
            })
            .collect();
        let mut margins = Vec::new();
        let mut excluded = Vec::new();
        for c in checked {
            match c? {
                (name, Some(m)) => margins.push(RepMargin { rep: name, margin: m }),
                (name, None) => excluded.push(name),
            }
        }
        let min_margin = margins.iter().map(|m| m.margin).fold(f64::INFINITY, f64::min);
        points.push(PointVerdict {
            point: x.clone(),
            strata,
            margins,
            excluded,
            min_margin,
            hypoelliptic: min_margin > opts.tol,
        });
    }
    let hypoelliptic = points.iter().all(|v| v.hypoelliptic);
    Ok(HypoReport { points, hypoelliptic })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::{CPoly, Poly};

    #[test]
    fn sphere_points_are_unit() {
        let grid = [q(1, 2), qi(-3), qi(0)];
        for n in 1..=3 {
            let pts = rational_sphere(n, &grid);
            assert!(pts.len() >= 2);
            for p in pts {
                assert_eq!(p.iter().fold(qi(0), |a, c| a + c * c), qi(1));
            }
        }
    }

    #[test]
    fn character_symbol_of_sum_of_squares() {
        let hall = HallBasis::new(2, 2).unwrap();
        let one = CPoly::real(Poly::one(2));
        let p = NCPoly::zero(2, 2)
            .with_term(one.clone(), &[0, 0])
            .unwrap()
            .with_term(one, &[1, 1])
            .unwrap();
        let s = symbol(&hall, &p, &Point::parse("0,0").unwrap(), &Representation::character(vec![qi(2), q(1, 3)])).unwrap();
        match s {
            SymbolOperator::Scalar { exact: Some(v), .. } => assert_eq!(v, Complex::new(-(qi(4) + q(1, 9)), qi(0))),
            other => panic!("{other:?}"),
        }
    }
}
