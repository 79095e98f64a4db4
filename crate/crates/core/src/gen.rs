//! Generators for test configurations over finite fields: curve sections of
//! hypersurfaces, plane complete intersections, the twisted-cubic
//! residuation example and the degree-3 census on cubic surfaces.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::main_bound;
use crate::cb::frobenius_permutation;
use crate::curve::{collinear, max_collinear};
use crate::error::{Error, Result};
use crate::field::{fp, uni_roots, Elem, Field, FpPoly, UniPoly};
use crate::form::Form;
use crate::linalg::{self, fp_rref, Matrix};
use crate::orbit::{orbit_config, GroupAction};
use crate::projective::{LinearSubspace, MonomialBasis, PointConfig, ProjPoint};

/// Draw budget for generators that retry degenerate draws.
pub const GEN_RETRIES: usize = 10_000;

fn prime_of(field: &Field) -> Result<u32> {
    if !field.is_finite() || field.degree() != 1 {
        return Err(Error::UnsupportedField("generators work over a prime field F_p".into()));
    }
    Ok(field.characteristic())
}

/// Coefficients of a form over `F_p` as residues.
pub fn form_residues(form: &Form) -> Result<Vec<u32>> {
    let f = form.field();
    form.coeffs()
        .iter()
        .map(|c| f.to_prime(c).ok_or_else(|| Error::FieldMismatch("form is not defined over F_p".into())))
        .collect()
}

/// The same form with coefficients embedded in `target`.
pub fn lift_form(form: &Form, target: &Field) -> Result<Form> {
    if target.characteristic() != form.field().characteristic() {
        return Err(Error::FieldMismatch("lifting needs the same characteristic".into()));
    }
    let cs = form_residues(form)?.into_iter().map(|c| target.from_prime(c)).collect();
    Form::new(target, form.nvars(), form.degree(), cs)
}

pub fn random_form<R: Rng>(field: &Field, nvars: usize, degree: usize, rng: &mut R) -> Form {
    let n = MonomialBasis::new(nvars - 1, degree).len();
    loop {
        let cs = (0..n).map(|_| field.random(rng)).collect();
        let f = Form::new(field, nvars, degree, cs).unwrap();
        if !f.is_zero() {
            return f;
        }
    }
}

/// Random monic irreducible polynomial of the given degree over `F_p`.
pub fn random_irreducible<R: Rng>(p: u32, degree: usize, rng: &mut R) -> FpPoly {
    loop {
        let mut f: FpPoly = (0..degree).map(|_| rng.gen_range(0..p)).collect();
        f.push(1);
        if fp::is_irreducible(&f, p) {
            return f;
        }
    }
}

/// A rational curve `t -> (f_0(t) : .. : f_N(t))` with `F_p` coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RationalCurveParam {
    pub p: u32,
    pub ambient_dim: usize,
    pub degree: usize,
    /// Coefficients low-to-high, one polynomial per coordinate.
    pub maps: Vec<FpPoly>,
}

impl RationalCurveParam {
    pub fn new(p: u32, ambient_dim: usize, degree: usize, maps: Vec<FpPoly>) -> Result<Self> {
        if maps.len() != ambient_dim + 1 {
            return Err(Error::DimensionMismatch("curve needs N+1 component maps".into()));
        }
        let mut maps = maps;
        for m in maps.iter_mut() {
            fp::trim(m);
            if m.len() > degree + 1 {
                return Err(Error::Precondition("component map exceeds the curve degree".into()));
            }
        }
        let g = maps.iter().fold(Vec::new(), |acc, m| fp::gcd(&acc, m, p));
        if fp::degree(&g).unwrap_or(1) > 0 {
            return Err(Error::Degenerate("component maps share a common factor".into()));
        }
        if maps.iter().all(|m| m.len() < degree + 1) {
            return Err(Error::Degenerate("no component map reaches the curve degree".into()));
        }
        Ok(RationalCurveParam { p, ambient_dim, degree, maps })
    }

    /// `(1 : t : .. : t^k : 0 : .. : 0)` in `P^N`.
    pub fn standard(p: u32, ambient_dim: usize, degree: usize) -> Result<Self> {
        if degree == 0 || degree > ambient_dim {
            return Err(Error::Unsupported(format!("standard curve of degree {} in P^{}", degree, ambient_dim)));
        }
        let maps = (0..=ambient_dim)
            .map(|i| {
                if i <= degree {
                    let mut v = vec![0; i + 1];
                    v[i] = 1;
                    v
                } else {
                    Vec::new()
                }
            })
            .collect();
        Self::new(p, ambient_dim, degree, maps)
    }

    /// Composes with a linear change of coordinates `x -> T x` over `F_p`.
    pub fn transformed(&self, t: &[Vec<u32>]) -> Result<Self> {
        let p = self.p;
        let maps = t
            .iter()
            .map(|row| {
                row.iter().zip(&self.maps).fold(Vec::new(), |acc, (&c, m)| fp::add(&acc, &fp::scale(m, c, p), p))
            })
            .collect();
        Self::new(p, self.ambient_dim, self.degree, maps)
    }

    pub fn point_at(&self, field: &Field, t: &Elem) -> Result<ProjPoint> {
        let coords = self.maps.iter().map(|m| UniPoly::from_fp(field, m).eval(t)).collect();
        ProjPoint::new(field, coords)
    }

    /// The image of the parameter at infinity.
    pub fn point_at_infinity(&self, field: &Field) -> Result<ProjPoint> {
        let k = self.degree;
        let coords = self.maps.iter().map(|m| field.from_prime(m.get(k).copied().unwrap_or(0))).collect();
        ProjPoint::new(field, coords)
    }

    /// `X(f_0(t), .., f_N(t))`.
    pub fn compose(&self, x: &Form) -> Result<FpPoly> {
        let cols = composition_columns(x.basis(), &self.maps, self.p);
        let cs = form_residues(x)?;
        let mut out = Vec::new();
        for (c, col) in cs.iter().zip(&cols) {
            if *c != 0 {
                out = fp::add(&out, &fp::scale(col, *c, self.p), self.p);
            }
        }
        Ok(out)
    }
}

/// `m(f_0(t), .., f_N(t))` for every monomial `m` of the basis.
pub fn composition_columns(basis: &MonomialBasis, maps: &[FpPoly], p: u32) -> Vec<FpPoly> {
    let d = basis.degree();
    let pows: Vec<Vec<FpPoly>> = maps
        .iter()
        .map(|m| {
            let mut v: Vec<FpPoly> = vec![vec![1]];
            for i in 1..=d {
                let next = fp::mul(&v[i - 1], m, p);
                v.push(next);
            }
            v
        })
        .collect();
    basis
        .monomials()
        .par_iter()
        .map(|e| {
            let mut acc: FpPoly = vec![1];
            for (i, &ei) in e.iter().enumerate() {
                if ei > 0 {
                    acc = fp::mul(&acc, &pows[i][ei as usize], p);
                }
            }
            acc
        })
        .collect()
}

/// A hypersurface with an optional sampled smoothness check.
#[derive(Clone, Debug)]
pub struct Hypersurface {
    pub form: Form,
    pub smoothness: Option<SmoothnessCheck>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SmoothnessCheck {
    pub points_checked: u64,
    pub exhaustive: bool,
    /// A common zero of all partials found among the checked points.
    pub singular_point: Option<Vec<u32>>,
}

impl SmoothnessCheck {
    pub fn not_falsified(&self) -> bool {
        self.singular_point.is_none()
    }
}

/// Looks for a common zero of all partial derivatives among `F_p` points:
/// every point when there are at most `budget`, otherwise `budget` random ones.
pub fn smoothness_check<R: Rng>(form: &Form, budget: u64, rng: &mut R) -> Result<SmoothnessCheck> {
    let field = form.field();
    let p = prime_of(field)? as u64;
    let n = form.nvars();
    let partials: Vec<Form> = (0..n).map(|i| form.partial(i)).collect();
    let singular = |v: &[u32]| -> bool {
        let c: Vec<Elem> = v.iter().map(|&x| field.from_prime(x)).collect();
        field.is_zero(&form.eval(&c)) && partials.iter().all(|g| field.is_zero(&g.eval(&c)))
    };
    let total = (p.saturating_pow(n as u32) - 1) / (p - 1);
    if total <= budget {
        // normalized points: first nonzero coordinate 1
        for lead in 0..n {
            let free = n - lead - 1;
            for code in 0..p.pow(free as u32) {
                let mut v = vec![0u32; n];
                v[lead] = 1;
                let mut x = code;
                for slot in v.iter_mut().skip(lead + 1) {
                    *slot = (x % p) as u32;
                    x /= p;
                }
                if singular(&v) {
                    return Ok(SmoothnessCheck { points_checked: total, exhaustive: true, singular_point: Some(v) });
                }
            }
        }
        return Ok(SmoothnessCheck { points_checked: total, exhaustive: true, singular_point: None });
    }
    for _ in 0..budget {
        let v: Vec<u32> = (0..n).map(|_| rng.gen_range(0..p as u32)).collect();
        if v.iter().any(|&x| x != 0) && singular(&v) {
            return Ok(SmoothnessCheck { points_checked: budget, exhaustive: false, singular_point: Some(v) });
        }
    }
    Ok(SmoothnessCheck { points_checked: budget, exhaustive: false, singular_point: None })
}

#[derive(Clone, Debug)]
pub struct SectionOrbit {
    pub config: PointConfig,
    pub action: GroupAction,
    /// Closed-point degree.
    pub degree: usize,
    pub multiplicity: usize,
    /// Irreducible factor of the restricted polynomial; empty for the point at infinity.
    pub factor: FpPoly,
}

#[derive(Clone, Debug)]
pub struct SectionResult {
    pub orbits: Vec<SectionOrbit>,
    /// Sum of degree times multiplicity.
    pub total_degree: usize,
    pub expected_degree: usize,
    pub transverse: bool,
    /// Whether every orbit size divides `deg X deg C`.
    pub sizes_divide: bool,
}

impl SectionResult {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "total_degree": self.total_degree,
            "expected_degree": self.expected_degree,
            "transverse": self.transverse,
            "orbit_sizes_divide_degree": self.sizes_divide,
            "orbits": self.orbits.iter().map(|o| serde_json::json!({
                "degree": o.degree,
                "multiplicity": o.multiplicity,
                "parameter_factor": o.factor,
                "config": o.config.to_json(),
            })).collect::<Vec<_>>(),
        })
    }
}

/// Intersects the hypersurface `x` with the curve `c`: restricts, factors
/// over `F_p` and maps each Frobenius orbit of parameter roots to the curve.
pub fn transverse_section<R: Rng>(x: &Form, c: &RationalCurveParam, rng: &mut R) -> Result<SectionResult> {
    let p = prime_of(x.field())?;
    if p != c.p || x.nvars() != c.ambient_dim + 1 {
        return Err(Error::DimensionMismatch("hypersurface and curve live in different spaces".into()));
    }
    let g = c.compose(x)?;
    if g.is_empty() {
        return Err(Error::Degenerate("the curve lies on the hypersurface".into()));
    }
    let expected = x.degree() * c.degree;
    let deg_g = fp::degree(&g).unwrap();
    let mut orbits = Vec::new();
    for (h, mult) in fp::factor(&g, p, rng) {
        let e = h.len() - 1;
        let (field, root) = if e == 1 {
            let f = Field::prime(p)?;
            let r = f.from_prime(fp::sub_mod(0, h[0], p));
            (f, r)
        } else {
            let f = Field::with_modulus(p, h.clone())?;
            let r = f.from_coeffs(&[0, 1])?;
            (f, r)
        };
        let pt = c.point_at(&field, &root)?;
        let (config, action) = orbit_config(&field, &pt, e)?;
        // X(C(t)) = g(t) exactly, so X vanishes at C(t') whenever g(t') = 0
        let gl = UniPoly::from_fp(&field, &g);
        let mut rj = root;
        for j in 0..e {
            if !field.is_zero(&gl.eval(&rj)) || c.point_at(&field, &rj)? != *config.point(j) {
                return Err(Error::MathAssertion("emitted section point is off the hypersurface".into()));
            }
            rj = field.frobenius(&rj)?;
        }
        orbits.push(SectionOrbit { config, action, degree: e, multiplicity: mult, factor: h });
    }
    if deg_g < expected {
        let f = Field::prime(p)?;
        let pt = c.point_at_infinity(&f)?;
        if !f.is_zero(&x.eval(pt.coords())) {
            return Err(Error::MathAssertion("point at infinity is off the hypersurface".into()));
        }
        let config = PointConfig::new(&f, c.ambient_dim, vec![pt])?;
        let action = GroupAction::frobenius(&config)?;
        orbits.push(SectionOrbit { config, action, degree: 1, multiplicity: expected - deg_g, factor: Vec::new() });
    }
    let total: usize = orbits.iter().map(|o| o.degree * o.multiplicity).sum();
    if total != expected {
        return Err(Error::MathAssertion(format!("section has degree {} instead of {}", total, expected)));
    }
    let transverse = orbits.iter().all(|o| o.multiplicity == 1);
    let sizes_divide = orbits.iter().all(|o| expected % o.degree == 0);
    Ok(SectionResult { orbits, total_degree: total, expected_degree: expected, transverse, sizes_divide })
}

/// A random point of `P^N(F_{p^e})` whose Frobenius orbit has exactly `e` points.
pub fn random_orbit<R: Rng>(p: u32, ambient_dim: usize, e: usize, rng: &mut R) -> Result<(PointConfig, GroupAction)> {
    let field = Field::finite(p, e)?;
    for _ in 0..GEN_RETRIES {
        let coords: Vec<Elem> = (0..=ambient_dim).map(|_| field.random(rng)).collect();
        let Ok(pt) = ProjPoint::new(&field, coords) else { continue };
        match orbit_config(&field, &pt, e) {
            Ok(r) => return Ok(r),
            Err(Error::Degenerate(_)) => continue,
            Err(err) => return Err(err),
        }
    }
    Err(Error::GenericityExhausted(GEN_RETRIES))
}

fn random_invertible<R: Rng>(p: u32, n: usize, rng: &mut R) -> Vec<Vec<u32>> {
    loop {
        let m: Vec<Vec<u32>> = (0..n).map(|_| (0..n).map(|_| rng.gen_range(0..p)).collect()).collect();
        if linalg::fp_rank(p, m.clone(), n) == n {
            return m;
        }
    }
}

/// A pipeline instance: a degree-`d` hypersurface in `P^{n+1}` whose
/// section by a degree-`k` rational curve is one closed point of degree `kd`.
#[derive(Clone, Debug)]
pub struct OrbitInstance {
    pub n: usize,
    pub k: usize,
    pub d: usize,
    pub hypersurface: Form,
    pub curve: RationalCurveParam,
    pub section: SectionResult,
}

impl OrbitInstance {
    pub fn orbit(&self) -> &SectionOrbit {
        &self.section.orbits[0]
    }
}

/// Largest `kd` handled by [`main_theorem_instance`].
pub const MAX_ORBIT_DEGREE: usize = 80;

/// Draws the curve `T (1 : t : .. : t^k : 0 ..)` with random invertible
/// `T`, a random irreducible `g` of degree `kd`, and a uniformly random
/// hypersurface `X` of degree `d = main_bound(n, k)` among those with
/// `X(C(t)) = g(t)`.
pub fn main_theorem_instance<R: Rng>(n: usize, k: usize, p: u32, rng: &mut R) -> Result<OrbitInstance> {
    let d = main_bound(n as i64, k as i64) as usize;
    if k * d > MAX_ORBIT_DEGREE {
        return Err(Error::Unsupported(format!("orbit degree {} exceeds {}", k * d, MAX_ORBIT_DEGREE)));
    }
    let nn = n + 1;
    let field = Field::prime(p)?;
    let basis = MonomialBasis::new(nn, d);
    let standard = RationalCurveParam::standard(p, nn, k)?;
    for _ in 0..PIPELINE_RETRIES {
        let curve = standard.transformed(&random_invertible(p, nn + 1, rng))?;
        let cols = composition_columns(&basis, &curve.maps, p);
        let g = random_irreducible(p, k * d, rng);
        let x0: Vec<u32> = (0..basis.len()).map(|_| rng.gen_range(0..p)).collect();
        let mut g0 = Vec::new();
        for (c, col) in x0.iter().zip(&cols) {
            g0 = fp::add(&g0, &fp::scale(col, *c, p), p);
        }
        let rhs = fp::sub(&g, &g0, p);
        // rows: coefficient of t^i in sum_j y_j col_j = rhs_i
        let m = basis.len();
        let rows: Vec<Vec<u32>> = (0..=k * d)
            .map(|i| {
                let mut r: Vec<u32> = cols.iter().map(|c| c.get(i).copied().unwrap_or(0)).collect();
                r.push(rhs.get(i).copied().unwrap_or(0));
                r
            })
            .collect();
        let (red, pivots) = fp_rref(p, rows, m + 1);
        if pivots.last() == Some(&m) {
            continue;
        }
        let mut xs = x0;
        for (row, &pc) in red.iter().zip(&pivots) {
            xs[pc] = fp::add_mod(xs[pc], row[m], p);
        }
        let x = Form::new(&field, nn + 1, d, xs.into_iter().map(|c| field.from_prime(c)).collect())?;
        if curve.compose(&x)? != g {
            return Err(Error::MathAssertion("conditioned hypersurface does not restrict to g".into()));
        }
        let section = transverse_section(&x, &curve, rng)?;
        if section.orbits.len() != 1 || section.orbits[0].degree != k * d {
            return Err(Error::MathAssertion("irreducible restriction produced several orbits".into()));
        }
        return Ok(OrbitInstance { n, k, d, hypersurface: x, curve, section });
    }
    Err(Error::GenericityExhausted(PIPELINE_RETRIES))
}

const PIPELINE_RETRIES: usize = 64;

/// A plane complete intersection of `a` lines with a degree-`b` curve.
#[derive(Clone, Debug)]
pub struct PlaneCi {
    pub config: PointConfig,
    pub lines: Vec<Form>,
    pub curve: Form,
    pub attempts: usize,
}

const LINE_RETRIES: usize = 1000;

/// `ab` points: the intersection of `a` random lines with a random
/// degree-`b` curve. Lines are redrawn until each meets the curve in `b`
/// distinct rational points; the curve is redrawn if the `ab` points are
/// not distinct.
pub fn plane_ci_config<R: Rng>(a: usize, b: usize, p: u32, rng: &mut R) -> Result<PlaneCi> {
    if a == 0 || b == 0 {
        return Err(Error::Precondition("degrees must be positive".into()));
    }
    let field = Field::prime(p)?;
    'attempt: for attempt in 1..=GEN_RETRIES {
        let g = random_form(&field, 3, b, rng);
        let mut lines = Vec::with_capacity(a);
        let mut pts = Vec::with_capacity(a * b);
        for _ in 0..a {
            let mut found = None;
            for _ in 0..LINE_RETRIES {
                let l = random_form(&field, 3, 1, rng);
                if let Some(on) = split_on_line(&l, &g)? {
                    found = Some((l, on));
                    break;
                }
            }
            let Some((l, on)) = found else { continue 'attempt };
            pts.extend(on);
            lines.push(l);
        }
        let Ok(config) = PointConfig::new(&field, 2, pts) else { continue };
        let ok = config.points().iter().all(|q| g.vanishes_at(q) && lines.iter().any(|l| l.vanishes_at(q)));
        if !ok {
            return Err(Error::MathAssertion("complete-intersection point off its curves".into()));
        }
        return Ok(PlaneCi { config, lines, curve: g, attempts: attempt });
    }
    Err(Error::GenericityExhausted(GEN_RETRIES))
}

// the deg g distinct rational points of g on the line l, if they exist
fn split_on_line(l: &Form, g: &Form) -> Result<Option<Vec<ProjPoint>>> {
    let field = l.field();
    let (_, ker) = linalg::rank_and_kernel(field, &[l.coeffs().to_vec()], 3);
    let (v1, v2) = (&ker[0], &ker[1]);
    let rows: Matrix = (0..3).map(|i| vec![v1[i].clone(), v2[i].clone()]).collect();
    let bin = g.compose_linear(&rows)?;
    if bin.is_zero() {
        return Ok(None);
    }
    let b = g.degree();
    // coefficient of s^(b-i) t^i
    let uni: Vec<Elem> = (0..=b).map(|i| bin.coeffs()[i].clone()).collect();
    let poly = UniPoly::new(field, uni);
    let point = |s: &Elem, t: &Elem| -> Result<ProjPoint> {
        ProjPoint::new(field, (0..3).map(|i| field.add(&field.mul(s, &v1[i]), &field.mul(t, &v2[i]))).collect())
    };
    let mut out = Vec::new();
    for r in uni_roots(&poly, field)? {
        if r.multiplicity != 1 {
            return Ok(None);
        }
        out.push(point(&field.one(), &r.value)?);
    }
    let deg = poly.degree().unwrap_or(0);
    match b - deg {
        0 => {}
        1 => out.push(point(&field.zero(), &field.one())?),
        _ => return Ok(None),
    }
    Ok(if out.len() == b { Some(out) } else { None })
}

#[derive(Clone, Debug, Serialize)]
pub struct ResiduationTrial {
    pub index: usize,
    pub seed: u64,
    /// Reason the draw was discarded.
    pub degenerate: Option<String>,
    /// Degree of the restriction of the quadric to the cubic.
    pub intersection_degree: usize,
    pub residual_factor_degrees: Vec<usize>,
    pub residual_size: usize,
    pub noncoplanar: bool,
    pub max_collinear: usize,
    /// A Frobenius-stable pairing of the residual points; each pair spans a
    /// line and the two lines together are defined over `F_p`.
    pub stable_pairing: Option<[[usize; 2]; 2]>,
    /// The pair of lines, when a stable pairing exists.
    pub line_pair: Option<Vec<serde_json::Value>>,
    pub not_covered: bool,
    pub residual: Option<serde_json::Value>,
}

impl ResiduationTrial {
    fn degenerate(index: usize, seed: u64, why: &str) -> Self {
        ResiduationTrial {
            index,
            seed,
            degenerate: Some(why.to_string()),
            intersection_degree: 0,
            residual_factor_degrees: Vec::new(),
            residual_size: 0,
            noncoplanar: false,
            max_collinear: 0,
            stable_pairing: None,
            line_pair: None,
            not_covered: false,
            residual: None,
        }
    }
}

const PAIRINGS: [[[usize; 2]; 2]; 3] = [[[0, 1], [2, 3]], [[0, 2], [1, 3]], [[0, 3], [1, 2]]];

/// One residuation trial: a quadric `Q`, a degree-2 point `P` on it, a
/// twisted cubic `C` through `P`, and the residual of `P` in `C ∩ Q`.
pub fn residuation_example(p: u32, index: usize, seed: u64) -> Result<ResiduationTrial> {
    if p == 2 {
        return Err(Error::Precondition("residuation needs odd p".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fp_field = Field::prime(p)?;
    let f2 = Field::finite(p, 2)?;
    let q = random_form(&fp_field, 4, 2, &mut rng);
    // degree-2 point: a line over F_p meeting Q in a conjugate pair
    let mut found = None;
    for _ in 0..GEN_RETRIES {
        let a: Vec<u32> = (0..4).map(|_| rng.gen_range(0..p)).collect();
        let b: Vec<u32> = (0..4).map(|_| rng.gen_range(0..p)).collect();
        let rows: Matrix = (0..4).map(|i| vec![fp_field.from_prime(a[i]), fp_field.from_prime(b[i])]).collect();
        let bin = q.compose_linear(&rows)?;
        // s^2, st, t^2 -> quadratic in t
        let quad: FpPoly = form_residues(&bin)?.into_iter().collect();
        if quad.len() == 3 && quad[2] != 0 && fp::is_irreducible(&quad, p) {
            found = Some((a, b, quad));
            break;
        }
    }
    let Some((a, b, quad)) = found else {
        return Ok(ResiduationTrial::degenerate(index, seed, "no degree-2 point found on the quadric"));
    };
    let tau = uni_roots(&UniPoly::from_fp(&f2, &quad), &f2)?[0].value.clone();
    let pt: Vec<Elem> = (0..4).map(|i| f2.add(&f2.from_prime(a[i]), &f2.mul(&tau, &f2.from_prime(b[i])))).collect();
    // conjugate parameter pair u, u^p
    let u = loop {
        let u = f2.random(&mut rng);
        if !f2.in_prime_subfield(&u) {
            break u;
        }
    };
    let lambda = loop {
        let l = f2.random(&mut rng);
        if !f2.is_zero(&l) {
            break l;
        }
    };
    let nu: Vec<Elem> = (0..4).map(|j| f2.pow(&u, j as u64)).collect();
    let target: Vec<Elem> = pt.iter().map(|c| f2.mul(&lambda, c)).collect();
    let split = |v: &[Elem]| -> (Vec<u32>, Vec<u32>) {
        let cs: Vec<Vec<u32>> = v.iter().map(|c| f2.coeffs(c)).collect();
        (cs.iter().map(|c| c[0]).collect(), cs.iter().map(|c| c[1]).collect())
    };
    let (na, nb) = split(&nu);
    let (ta, tb) = split(&target);
    let Some(t) = matching_transform(p, [&na, &nb], [&ta, &tb], &mut rng) else {
        return Ok(ResiduationTrial::degenerate(index, seed, "no coordinate change matched the orbit"));
    };
    let curve = RationalCurveParam::standard(p, 3, 3)?.transformed(&t)?;
    let g = curve.compose(&q)?;
    let deg = fp::degree(&g).unwrap_or(0);
    if g.is_empty() {
        return Ok(ResiduationTrial::degenerate(index, seed, "the cubic lies on the quadric"));
    }
    if deg != 6 {
        return Ok(ResiduationTrial::degenerate(index, seed, "the cubic meets the quadric at the parameter infinity"));
    }
    // minimal polynomial of u: t^2 - (u + u^p) t + u^{p+1}
    let up = f2.frobenius(&u)?;
    let tr = fp_field.to_prime(&fp_lift(&f2, &f2.add(&u, &up))).unwrap();
    let nm = fp_field.to_prime(&fp_lift(&f2, &f2.mul(&u, &up))).unwrap();
    let h: FpPoly = vec![nm, fp::sub_mod(0, tr, p), 1];
    let (res, rem) = fp::divrem(&g, &h, p);
    if !rem.is_empty() {
        return Err(Error::MathAssertion("the cubic does not pass through the degree-2 point".into()));
    }
    let mut trial = ResiduationTrial::degenerate(index, seed, "");
    trial.degenerate = None;
    trial.intersection_degree = deg;
    let dg = fp::gcd(&res, &fp::derivative(&res, p), p);
    if fp::degree(&dg).unwrap_or(0) > 0 || fp::degree(&fp::gcd(&res, &h, p)).unwrap_or(0) > 0 {
        trial.degenerate = Some("residual intersection is not four distinct points".into());
        return Ok(trial);
    }
    let factors = fp::factor(&res, p, &mut rng);
    let degs: Vec<usize> = factors.iter().map(|(f, _)| f.len() - 1).collect();
    let ext = degs.iter().fold(1usize, |acc, &e| num_integer::lcm(acc, e));
    let fl = Field::finite(p, ext)?;
    let mut pts = Vec::new();
    for r in uni_roots(&UniPoly::from_fp(&fl, &res), &fl)? {
        pts.push(curve.point_at(&fl, &r.value)?);
    }
    let s = PointConfig::new(&fl, 3, pts)?;
    trial.residual_factor_degrees = degs;
    trial.residual_size = s.len();
    if s.len() != 4 {
        return Err(Error::MathAssertion(format!("residual has {} points instead of 4", s.len())));
    }
    let ql = lift_form(&q, &fl)?;
    if s.points().iter().any(|x| !ql.vanishes_at(x)) {
        return Err(Error::MathAssertion("residual point off the quadric".into()));
    }
    let m: Matrix = s.points().iter().map(|x| x.coords().to_vec()).collect();
    trial.noncoplanar = linalg::rank(&fl, &m, 4) == 4;
    trial.max_collinear = max_collinear(&s)?.1.len();
    let sigma = frobenius_permutation(&s)?
        .ok_or_else(|| Error::MathAssertion("residual is not Frobenius-stable".into()))?;
    for pairing in PAIRINGS {
        let moved: BTreeSet<[usize; 2]> = pairing
            .iter()
            .map(|pr| {
                let (x, y) = (sigma[pr[0]], sigma[pr[1]]);
                [x.min(y), x.max(y)]
            })
            .collect();
        if moved == pairing.iter().copied().collect() {
            let lines = pairing
                .iter()
                .map(|pr| {
                    LinearSubspace::from_points(&fl, 3, &[s.point(pr[0]), s.point(pr[1])]).map(|l| l.to_json(&fl))
                })
                .collect::<Result<Vec<_>>>()?;
            trial.stable_pairing = Some(pairing);
            trial.line_pair = Some(lines);
            break;
        }
    }
    trial.not_covered = trial.noncoplanar && trial.max_collinear <= 2 && trial.stable_pairing.is_none();
    trial.residual = Some(s.to_json());
    Ok(trial)
}

fn fp_lift(f2: &Field, x: &Elem) -> Elem {
    debug_assert!(f2.in_prime_subfield(x));
    Field::prime(f2.characteristic()).unwrap().from_prime(f2.coeffs(x)[0])
}

// T over F_p with T a_i = b_i for the two given pairs, extended randomly.
fn matching_transform<R: Rng>(p: u32, src: [&[u32]; 2], dst: [&[u32]; 2], rng: &mut R) -> Option<Vec<Vec<u32>>> {
    let field = Field::prime(p).ok()?;
    let to = |v: &[u32]| -> Vec<Elem> { v.iter().map(|&c| field.from_prime(c)).collect() };
    for _ in 0..PIPELINE_RETRIES {
        let e3: Vec<u32> = (0..4).map(|_| rng.gen_range(0..p)).collect();
        let e4: Vec<u32> = (0..4).map(|_| rng.gen_range(0..p)).collect();
        let x3: Vec<u32> = (0..4).map(|_| rng.gen_range(0..p)).collect();
        let x4: Vec<u32> = (0..4).map(|_| rng.gen_range(0..p)).collect();
        let cols_src = [to(src[0]), to(src[1]), to(&e3), to(&e4)];
        let cols_dst = [to(dst[0]), to(dst[1]), to(&x3), to(&x4)];
        let sm: Matrix = (0..4).map(|i| cols_src.iter().map(|c| c[i].clone()).collect()).collect();
        let dm: Matrix = (0..4).map(|i| cols_dst.iter().map(|c| c[i].clone()).collect()).collect();
        let Some(inv) = linalg::inverse(&field, &sm) else { continue };
        if linalg::rank(&field, &dm, 4) < 4 {
            continue;
        }
        let t = linalg::mat_mul(&field, &dm, &inv, 4);
        return Some(t.iter().map(|r| r.iter().map(|c| field.to_prime(c).unwrap()).collect()).collect());
    }
    None
}

#[derive(Clone, Debug, Serialize)]
pub struct ResiduationSummary {
    pub p: u32,
    pub seed: u64,
    pub trials: usize,
    pub degenerate: usize,
    pub nondegenerate: usize,
    pub noncoplanar: usize,
    pub not_covered: usize,
    /// Non-degenerate trials covered by a Frobenius-stable pair of lines.
    pub covered_by_line_pair: usize,
    /// Counts of residual factorization types, keyed like `"1+3"`.
    pub factor_types: std::collections::BTreeMap<String, usize>,
    /// Required share of non-degenerate trials with `not_covered`, as num/den.
    pub target: [usize; 2],
    pub meets_target: bool,
}

/// Runs `trials` seeded residuation trials in parallel; trial seeds are
/// drawn from `seed` in order.
pub fn residuation_trials(p: u32, trials: usize, seed: u64) -> Result<(Vec<ResiduationTrial>, ResiduationSummary)> {
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let seeds: Vec<u64> = (0..trials).map(|_| master.gen()).collect();
    let out: Vec<ResiduationTrial> = seeds
        .par_iter()
        .enumerate()
        .map(|(i, &s)| residuation_example(p, i, s))
        .collect::<Result<_>>()?;
    let nondeg: Vec<&ResiduationTrial> = out.iter().filter(|t| t.degenerate.is_none()).collect();
    let mut types = std::collections::BTreeMap::new();
    for t in &nondeg {
        let key = t.residual_factor_degrees.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("+");
        *types.entry(key).or_insert(0) += 1;
    }
    let not_covered = nondeg.iter().filter(|t| t.not_covered).count();
    let summary = ResiduationSummary {
        p,
        seed,
        trials,
        degenerate: trials - nondeg.len(),
        nondegenerate: nondeg.len(),
        noncoplanar: nondeg.iter().filter(|t| t.noncoplanar).count(),
        not_covered,
        covered_by_line_pair: nondeg.iter().filter(|t| t.stable_pairing.is_some()).count(),
        factor_types: types,
        target: [9, 10],
        meets_target: !nondeg.is_empty() && not_covered * 10 >= nondeg.len() * 9,
    };
    Ok((out, summary))
}

/// `x_0^3 + x_1^3 + x_2^3 + x_3^3`.
pub fn fermat_cubic(p: u32) -> Result<Form> {
    let f = Field::prime(p)?;
    let terms: Vec<(Vec<u32>, Elem)> = (0..4)
        .map(|i| {
            let mut e = vec![0u32; 4];
            e[i] = 3;
            (e, f.one())
        })
        .collect();
    Form::from_terms(&f, 4, 3, &terms)
}

#[derive(Clone, Debug, Serialize)]
pub struct CensusRow {
    pub sample: usize,
    pub source: &'static str,
    pub degree3: bool,
    pub collinear: bool,
    pub orbit: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct CensusReport {
    pub p: u32,
    pub seed: u64,
    pub budget: usize,
    pub line_samples: usize,
    /// Degree-3 points found as irreducible cubic line sections; collinear by construction.
    pub line_degree3: usize,
    pub line_degree3_collinear: usize,
    pub direct_samples: usize,
    pub direct_degree3: usize,
    pub direct_collinear: usize,
    pub direct_distinct_supports: usize,
    /// Collinear share of the directly sampled orbits, as num/den.
    pub collinear_fraction: [usize; 2],
    /// Threshold chosen for regression stability, as num/den.
    pub threshold: [usize; 2],
    pub found_noncollinear: bool,
    pub below_threshold: bool,
}

/// Degree-3 points on the cubic surface `x` over `F_p`: `budget` random
/// line sections and `budget` direct samples of `F_{p^3}`-points.
pub fn degree3_census(x: &Form, budget: usize, seed: u64) -> Result<(CensusReport, Vec<CensusRow>)> {
    let p = prime_of(x.field())?;
    if x.nvars() != 4 || x.degree() != 3 || x.is_zero() {
        return Err(Error::Precondition("census expects a nonzero cubic form in 4 variables".into()));
    }
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let line_seed: u64 = master.gen();
    let direct_seed: u64 = master.gen();
    let fpf = x.field().clone();
    let mut rows = Vec::new();
    let mut lrng = ChaCha8Rng::seed_from_u64(line_seed);
    let mut line_deg3 = 0;
    for i in 0..budget {
        let rows_m: Matrix = (0..4).map(|_| vec![fpf.random(&mut lrng), fpf.random(&mut lrng)]).collect();
        if linalg::rank(&fpf, &rows_m, 2) < 2 {
            continue;
        }
        let bin = x.compose_linear(&rows_m)?;
        if bin.is_zero() {
            continue;
        }
        // irreducible cubic in t with nonzero leading term
        let cubic: FpPoly = form_residues(&bin)?;
        if cubic.len() == 4 && cubic[3] != 0 && fp::is_irreducible(&cubic, p) {
            line_deg3 += 1;
            rows.push(CensusRow { sample: i, source: "line", degree3: true, collinear: true, orbit: String::new() });
        }
    }
    let f3 = Field::finite(p, 3)?;
    let xl = lift_form(x, &f3)?;
    let direct: Vec<(usize, Option<(bool, String)>)> = (0..budget)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(direct_seed ^ (i as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
            Ok((i, sample_degree3(&xl, &f3, &mut rng)?))
        })
        .collect::<Result<_>>()?;
    let mut supports = BTreeSet::new();
    let (mut deg3, mut col) = (0, 0);
    for (i, r) in direct {
        if let Some((c, key)) = r {
            deg3 += 1;
            if c {
                col += 1;
            }
            rows.push(CensusRow { sample: i, source: "direct", degree3: true, collinear: c, orbit: key.clone() });
            supports.insert(key);
        }
    }
    let rep = CensusReport {
        p,
        seed,
        budget,
        line_samples: budget,
        line_degree3: line_deg3,
        line_degree3_collinear: line_deg3,
        direct_samples: budget,
        direct_degree3: deg3,
        direct_collinear: col,
        direct_distinct_supports: supports.len(),
        collinear_fraction: [col, deg3],
        threshold: [1, 10],
        found_noncollinear: deg3 > col,
        below_threshold: deg3 > 0 && col * 10 < deg3,
    };
    Ok((rep, rows))
}

// one random F_{p^3}-point of x; Some((collinear, support key)) if its orbit has 3 points
fn sample_degree3(x: &Form, f3: &Field, rng: &mut ChaCha8Rng) -> Result<Option<(bool, String)>> {
    let c: Vec<Elem> = (0..3).map(|_| f3.random(rng)).collect();
    let rows: Matrix = vec![
        vec![c[0].clone(), f3.zero()],
        vec![c[1].clone(), f3.zero()],
        vec![c[2].clone(), f3.zero()],
        vec![f3.zero(), f3.one()],
    ];
    let bin = x.compose_linear(&rows)?;
    if bin.is_zero() {
        return Ok(None);
    }
    let poly = UniPoly::new(f3, bin.coeffs().to_vec());
    let roots = uni_roots(&poly, f3)?;
    let Some(r) = roots.first() else { return Ok(None) };
    let Ok(pt) = ProjPoint::new(f3, vec![c[0].clone(), c[1].clone(), c[2].clone(), r.value.clone()]) else {
        return Ok(None);
    };
    let p1 = pt.frobenius(f3)?;
    if p1 == pt {
        return Ok(None);
    }
    let p2 = p1.frobenius(f3)?;
    let mut orbit = [pt, p1, p2];
    let col = collinear(f3, &orbit[0], &orbit[1], &orbit[2]);
    orbit.sort();
    let key = serde_json::to_string(&orbit.iter().map(|q| q.to_json(f3)).collect::<Vec<_>>()).unwrap();
    Ok(Some((col, key)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_curve_and_composition() {
        let c = RationalCurveParam::standard(7, 3, 3).unwrap();
        let f = Field::prime(7).unwrap();
        // x0 x3 - x1 x2 vanishes on the twisted cubic
        let q = Form::from_terms(&f, 4, 2, &[(vec![1, 0, 0, 1], f.one()), (vec![0, 1, 1, 0], f.from_i64(-1))]).unwrap();
        assert!(c.compose(&q).unwrap().is_empty());
        assert!(RationalCurveParam::new(7, 1, 1, vec![vec![0, 1], vec![0, 2]]).is_err());
    }

    #[test]
    fn fermat_line_section_orbits() {
        // 1 + t^3 over F_7 on the line (1 : t : 0 : 0)
        let x = fermat_cubic(7).unwrap();
        let c = RationalCurveParam::standard(7, 3, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = transverse_section(&x, &c, &mut rng).unwrap();
        assert_eq!(s.total_degree, 3);
        assert!(s.transverse);
        let mut degs: Vec<usize> = s.orbits.iter().map(|o| o.degree).collect();
        degs.sort();
        assert_eq!(degs, vec![1, 1, 1]);
    }
}
