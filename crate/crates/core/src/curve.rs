//! Curve witnesses and the curve-extraction procedures: collinearity,
//! plane-curve interpolation, squarefree parts, cone intersections, the
//! projection component split and the projection bootstrap.

use rand::Rng;
use serde::Serialize;

use crate::cb::cb_satisfies;
use crate::error::{Error, Result};
use crate::field::{uni_roots, Elem, Field, UniPoly};
use crate::form::{form_divides, form_div_exact, form_gcd, Form};
use crate::linalg::{self, Matrix};
use crate::projective::{
    eval_matrix, random_projection, LinearSubspace, MonomialBasis, PointConfig, ProjPoint, Projection,
    PROJECTION_RETRIES,
};

/// A cone over a plane curve: the points `x` with `form(A x) = 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cone {
    /// `3 x (N+1)` projection matrix.
    pub projection: Matrix,
    pub form: Form,
}

impl Cone {
    pub fn contains(&self, field: &Field, p: &ProjPoint) -> bool {
        let y = linalg::mat_vec(field, &self.projection, p.coords());
        if y.iter().all(|c| field.is_zero(c)) {
            // the vertex lies on every cone
            return true;
        }
        field.is_zero(&self.form.eval(&y))
    }

    fn conjugate(&self, field: &Field, k: usize) -> Result<Self> {
        Ok(Cone {
            projection: frob_matrix(field, &self.projection, k)?,
            form: self.form.frobenius_pow(k)?,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CurveRepr {
    Line(LinearSubspace),
    /// A plane curve; the ambient space is `P^2`.
    Plane(Form),
    /// Intersection of cones over plane curves.
    Cones(Vec<Cone>),
    Union(Vec<CurveWitness>),
}

/// A curve together with the configuration labels it is certified to contain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CurveWitness {
    field: Field,
    ambient_dim: usize,
    degree: usize,
    repr: CurveRepr,
    labels: Vec<usize>,
}

impl CurveWitness {
    /// Witness covering every label of `config` that lies on the curve.
    pub fn on_config(config: &PointConfig, degree: usize, repr: CurveRepr) -> Result<Self> {
        let mut w = CurveWitness {
            field: config.field().clone(),
            ambient_dim: config.ambient_dim(),
            degree,
            repr,
            labels: Vec::new(),
        };
        w.check_shape()?;
        w.labels = (0..config.len()).filter(|&i| w.contains(config.point(i))).collect();
        Ok(w)
    }

    /// Witness for the given labels; membership of each is re-verified.
    pub fn with_labels(config: &PointConfig, degree: usize, repr: CurveRepr, labels: Vec<usize>) -> Result<Self> {
        let w = CurveWitness {
            field: config.field().clone(),
            ambient_dim: config.ambient_dim(),
            degree,
            repr,
            labels,
        };
        w.check_shape()?;
        for &l in &w.labels {
            if l >= config.len() || !w.contains(config.point(l)) {
                return Err(Error::MathAssertion(format!("label {} is not on the witness curve", l)));
            }
        }
        Ok(w)
    }

    /// The degree-0 witness: the empty curve.
    pub fn empty(config: &PointConfig) -> Self {
        CurveWitness {
            field: config.field().clone(),
            ambient_dim: config.ambient_dim(),
            degree: 0,
            repr: CurveRepr::Union(Vec::new()),
            labels: Vec::new(),
        }
    }

    fn check_shape(&self) -> Result<()> {
        match &self.repr {
            CurveRepr::Line(l) => {
                if l.dim() != 1 || l.ambient_dim() != self.ambient_dim || self.degree != 1 {
                    return Err(Error::DimensionMismatch("line witness must be a degree-1 line".into()));
                }
            }
            CurveRepr::Plane(f) => {
                if self.ambient_dim != 2 || f.nvars() != 3 || f.degree() != self.degree || f.is_zero() {
                    return Err(Error::DimensionMismatch("plane-curve witness needs a nonzero ternary form".into()));
                }
            }
            CurveRepr::Cones(cs) => {
                for c in cs {
                    if c.projection.len() != 3 || c.projection.iter().any(|r| r.len() != self.ambient_dim + 1) {
                        return Err(Error::DimensionMismatch("cone projection must be 3 x (N+1)".into()));
                    }
                }
            }
            CurveRepr::Union(ms) => {
                let total: usize = ms.iter().map(|m| m.degree).sum();
                if total != self.degree {
                    return Err(Error::MathAssertion("union degree differs from the sum of member degrees".into()));
                }
                for i in 0..ms.len() {
                    for j in i + 1..ms.len() {
                        if ms[i].repr == ms[j].repr {
                            return Err(Error::MathAssertion("union members must be distinct".into()));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn repr(&self) -> &CurveRepr {
        &self.repr
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn kind(&self) -> &'static str {
        match self.repr {
            CurveRepr::Line(_) => "line",
            CurveRepr::Plane(_) => "plane_curve",
            CurveRepr::Cones(_) => "cones",
            CurveRepr::Union(_) => "union",
        }
    }

    pub fn contains(&self, p: &ProjPoint) -> bool {
        match &self.repr {
            CurveRepr::Line(l) => l.contains(&self.field, p),
            CurveRepr::Plane(f) => f.vanishes_at(p),
            CurveRepr::Cones(cs) => cs.iter().all(|c| c.contains(&self.field, p)),
            CurveRepr::Union(ms) => ms.iter().any(|m| m.contains(p)),
        }
    }

    /// Re-evaluates the label set against another configuration.
    pub fn relabel(&self, config: &PointConfig) -> Result<Self> {
        Self::on_config(config, self.degree, self.repr.clone())
    }

    /// Applies the `k`-th power of Frobenius to all defining data and
    /// recomputes labels on `config`.
    pub fn conjugate_on(&self, config: &PointConfig, k: usize) -> Result<Self> {
        let repr = self.conjugate_repr(k)?;
        Self::on_config(config, self.degree, repr)
    }

    fn conjugate_repr(&self, k: usize) -> Result<CurveRepr> {
        let f = &self.field;
        Ok(match &self.repr {
            CurveRepr::Line(l) => {
                let mut cur = l.clone();
                for _ in 0..k % f.degree().max(1) {
                    cur = cur.frobenius(f)?;
                }
                CurveRepr::Line(cur)
            }
            CurveRepr::Plane(form) => CurveRepr::Plane(form.frobenius_pow(k)?),
            CurveRepr::Cones(cs) => CurveRepr::Cones(cs.iter().map(|c| c.conjugate(f, k)).collect::<Result<_>>()?),
            CurveRepr::Union(ms) => CurveRepr::Union(
                ms.iter()
                    .map(|m| {
                        Ok(CurveWitness {
                            field: m.field.clone(),
                            ambient_dim: m.ambient_dim,
                            degree: m.degree,
                            repr: m.conjugate_repr(k)?,
                            labels: Vec::new(),
                        })
                    })
                    .collect::<Result<_>>()?,
            ),
        })
    }

    /// Members of a union, or the witness itself.
    pub fn members(&self) -> Vec<&CurveWitness> {
        match &self.repr {
            CurveRepr::Union(ms) if !ms.is_empty() => ms.iter().collect(),
            _ => vec![self],
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let f = &self.field;
        let mat = |m: &Matrix| -> serde_json::Value {
            m.iter().map(|r| r.iter().map(|c| f.elem_to_json(c)).collect::<Vec<_>>()).collect()
        };
        let body = match &self.repr {
            CurveRepr::Line(l) => serde_json::json!({ "basis": l.to_json(f) }),
            CurveRepr::Plane(form) => serde_json::json!({ "form": form.to_json() }),
            CurveRepr::Cones(cs) => serde_json::json!({
                "cones": cs.iter().map(|c| serde_json::json!({
                    "projection": mat(&c.projection),
                    "form": c.form.to_json(),
                })).collect::<Vec<_>>()
            }),
            CurveRepr::Union(ms) => serde_json::json!({ "members": ms.iter().map(|m| m.to_json()).collect::<Vec<_>>() }),
        };
        serde_json::json!({
            "kind": self.kind(),
            "ambient_dim": self.ambient_dim,
            "degree": self.degree,
            "covered_labels": self.labels,
            "representation": body,
        })
    }

    /// Reads a witness and re-verifies it against `config`.
    pub fn from_json(config: &PointConfig, v: &serde_json::Value) -> Result<Self> {
        let repr = repr_from_json(config, v)?;
        let degree = v["degree"].as_u64().ok_or_else(|| Error::Parse("witness needs a degree".into()))? as usize;
        Self::on_config(config, degree, repr)
    }
}

fn repr_from_json(config: &PointConfig, v: &serde_json::Value) -> Result<CurveRepr> {
    let f = config.field();
    let body = &v["representation"];
    let mat = |m: &serde_json::Value| -> Result<Matrix> {
        m.as_array()
            .ok_or_else(|| Error::Parse("expected a matrix".into()))?
            .iter()
            .map(|row| {
                row.as_array()
                    .ok_or_else(|| Error::Parse("expected a matrix row".into()))?
                    .iter()
                    .map(|c| f.elem_from_json(c))
                    .collect()
            })
            .collect()
    };
    match v["kind"].as_str() {
        Some("line") => Ok(CurveRepr::Line(LinearSubspace::new(f, config.ambient_dim(), mat(&body["basis"])?)?)),
        Some("plane_curve") => Ok(CurveRepr::Plane(Form::from_json(f, &body["form"])?)),
        Some("cones") => {
            let cs = body["cones"]
                .as_array()
                .ok_or_else(|| Error::Parse("cones witness needs a cone list".into()))?
                .iter()
                .map(|c| Ok(Cone { projection: mat(&c["projection"])?, form: Form::from_json(f, &c["form"])? }))
                .collect::<Result<_>>()?;
            Ok(CurveRepr::Cones(cs))
        }
        Some("union") => {
            let ms = body["members"]
                .as_array()
                .ok_or_else(|| Error::Parse("union witness needs members".into()))?
                .iter()
                .map(|m| CurveWitness::from_json(config, m))
                .collect::<Result<_>>()?;
            Ok(CurveRepr::Union(ms))
        }
        other => Err(Error::Parse(format!("unknown witness kind {:?}", other))),
    }
}

fn frob_matrix(field: &Field, m: &Matrix, k: usize) -> Result<Matrix> {
    m.iter().map(|r| r.iter().map(|c| field.frobenius_pow(c, k)).collect()).collect()
}

/// Whether `x` lies on the line through `p` and `q` (all 3x3 minors vanish).
pub fn collinear(field: &Field, p: &ProjPoint, q: &ProjPoint, x: &ProjPoint) -> bool {
    let (a, b, c) = (p.coords(), q.coords(), x.coords());
    let n = a.len();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let m = vec![
                    vec![a[i].clone(), a[j].clone(), a[k].clone()],
                    vec![b[i].clone(), b[j].clone(), b[k].clone()],
                    vec![c[i].clone(), c[j].clone(), c[k].clone()],
                ];
                if !field.is_zero(&linalg::det(field, &m)) {
                    return false;
                }
            }
        }
    }
    true
}

/// A line through the most points, with all its labels; ties go to the
/// lexicographically smallest label pair.
pub fn max_collinear(s: &PointConfig) -> Result<(LinearSubspace, Vec<usize>)> {
    if s.len() < 2 {
        return Err(Error::Degenerate("max_collinear needs at least two points".into()));
    }
    let field = s.field();
    let n = s.len();
    let mut seen = vec![vec![false; n]; n];
    let mut best: Option<(usize, usize, Vec<usize>)> = None;
    for i in 0..n {
        for j in i + 1..n {
            if seen[i][j] {
                continue;
            }
            let on: Vec<usize> = (0..n)
                .filter(|&x| x == i || x == j || collinear(field, s.point(i), s.point(j), s.point(x)))
                .collect();
            for &a in &on {
                for &b in &on {
                    seen[a][b] = true;
                }
            }
            if best.as_ref().map(|b| on.len() > b.2.len()).unwrap_or(true) {
                best = Some((i, j, on));
            }
        }
    }
    let (i, j, on) = best.unwrap();
    let line = LinearSubspace::from_points(field, s.ambient_dim(), &[s.point(i), s.point(j)])?;
    Ok((line, on))
}

/// The reduced-echelon first kernel vector of the degree-`k` evaluation
/// matrix, as a plane curve through all of `s`.
pub fn plane_curve_fit(s: &PointConfig, k: usize) -> Result<Option<Form>> {
    if s.ambient_dim() != 2 {
        return Err(Error::DimensionMismatch(format!("plane fit needs P^2, got P^{}", s.ambient_dim())));
    }
    if k == 0 {
        return Err(Error::Precondition("curve degree must be at least 1".into()));
    }
    let cols = MonomialBasis::new(2, k).len();
    let (_, ker) = linalg::rank_and_kernel(s.field(), &eval_matrix(s, k), cols);
    match ker.into_iter().next() {
        None => Ok(None),
        Some(v) => Ok(Some(Form::new(s.field(), 3, k, v)?)),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Squarefree {
    pub form: Form,
    /// Input degree equals output degree.
    pub reduced: bool,
    /// Characteristic at most the degree: inseparable behavior not excluded.
    pub inconclusive: bool,
}

/// `F / gcd(F, dF/dx_0, dF/dx_1, dF/dx_2)`, normalized.
pub fn squarefree_part(f: &Form) -> Result<Squarefree> {
    if f.is_zero() {
        return Err(Error::Degenerate("squarefree part of the zero form".into()));
    }
    if f.nvars() != 3 {
        return Err(Error::DimensionMismatch("squarefree part is implemented for plane curves".into()));
    }
    let p = f.field().characteristic() as usize;
    let inconclusive = p != 0 && p <= f.degree();
    let parts = [f.partial(0), f.partial(1), f.partial(2)];
    let g = form_gcd(&[f, &parts[0], &parts[1], &parts[2]])?;
    let form = form_div_exact(f, &g)?.normalized();
    let reduced = form.degree() == f.degree();
    Ok(Squarefree { form, reduced, inconclusive })
}

fn plane_line_witness(config: &PointConfig, form: &Form) -> Result<CurveRepr> {
    let field = config.field();
    let (_, ker) = linalg::rank_and_kernel(field, &[form.coeffs().to_vec()], 3);
    Ok(CurveRepr::Line(LinearSubspace::new(field, 2, ker)?))
}

/// Cone pair from two random projections to `P^2` with degree-`k` fits.
pub fn cone_intersection_curve<R: Rng + ?Sized>(s: &PointConfig, k: usize, rng: &mut R) -> Result<Option<CurveWitness>> {
    if s.ambient_dim() < 3 {
        return Err(Error::Precondition("cone intersections need N >= 3".into()));
    }
    let mut cones = Vec::with_capacity(2);
    for _ in 0..2 {
        let pr = random_projection(s, 2, rng)?;
        match plane_curve_fit(&pr.image, k)? {
            None => return Ok(None),
            Some(f) => cones.push(Cone { projection: pr.matrix, form: f }),
        }
    }
    let w = CurveWitness::on_config(s, k * k, CurveRepr::Cones(cones))?;
    if w.labels.len() != s.len() {
        return Err(Error::MathAssertion("cone pair does not contain the whole configuration".into()));
    }
    Ok(Some(w))
}

#[derive(Clone, Debug)]
pub struct SplitResult {
    pub k_prime: usize,
    pub labels: Vec<usize>,
    pub witness: CurveWitness,
    /// `|S| - (k-k')(k^2-k')`.
    pub guaranteed: i64,
    pub resultant_degree: usize,
}

/// Lemma-style component split in `P^3`: compares the projected degree-`k`
/// curve with the projection of the cone-intersection curve and keeps
/// their common part.
pub fn projection_component_split<R: Rng + ?Sized>(s: &PointConfig, k: usize, rng: &mut R) -> Result<SplitResult> {
    check_split_dim(s)?;
    let pr = random_projection(s, 2, rng)?;
    let c = plane_curve_fit(&pr.image, k)?
        .ok_or_else(|| Error::NoCurve(format!("projected configuration lies on no curve of degree {}", k)))?;
    split_with(s, k, &pr, &c, rng)
}

fn check_split_dim(s: &PointConfig) -> Result<()> {
    match s.ambient_dim() {
        3 => Ok(()),
        n if n < 3 => Err(Error::Precondition(format!("component split needs P^3, got P^{}", n))),
        n => Err(Error::Unsupported(format!("space-curve machinery covers P^3 only, got P^{}", n))),
    }
}

/// Split using a fixed projection `pr` whose image lies on the plane curve `c`.
pub fn split_with<R: Rng + ?Sized>(
    s: &PointConfig,
    k: usize,
    pr: &Projection,
    c: &Form,
    rng: &mut R,
) -> Result<SplitResult> {
    check_split_dim(s)?;
    let field = s.field();
    if !pr.image.points().iter().all(|p| c.vanishes_at(p)) {
        return Err(Error::NoCurve("projected configuration is not on the given curve".into()));
    }
    let center = pr
        .center
        .as_ref()
        .ok_or_else(|| Error::Precondition("component split needs a proper projection".into()))?;
    let cpt = ProjPoint::new(field, center.basis()[0].clone())?;
    let mut last_err = Error::GenericityExhausted(PROJECTION_RETRIES);
    for _ in 0..PROJECTION_RETRIES {
        let mut cones = Vec::with_capacity(2);
        for _ in 0..2 {
            let p = random_projection(s, 2, rng)?;
            let f = plane_curve_fit(&p.image, k)?.ok_or_else(|| {
                Error::NoCurve(format!("a generic projection lies on no curve of degree {}", k))
            })?;
            cones.push(Cone { projection: p.matrix, form: f });
        }
        if cones.iter().all(|cn| cn.contains(field, &cpt)) {
            last_err = Error::GenericityExhausted(PROJECTION_RETRIES);
            continue;
        }
        let r = match cone_resultant(field, &pr.matrix, &cones[0], &cones[1], k, rng) {
            Ok(r) => r,
            Err(e @ Error::Degenerate(_)) => {
                last_err = e;
                continue;
            }
            Err(e) => return Err(e),
        };
        let sc = squarefree_part(c)?;
        let sr = squarefree_part(&r)?;
        let g = form_gcd(&[&sc.form, &sr.form])?;
        let kp = g.degree();
        let guaranteed = s.len() as i64 - ((k - kp) as i64) * ((k * k) as i64 - kp as i64);
        if s.len() > k * k * k && kp == 0 {
            return Err(Error::MathAssertion(format!(
                "|S| = {} > k^3 = {} but the common part has degree 0",
                s.len(),
                k * k * k
            )));
        }
        let witness = if kp == 0 {
            CurveWitness::empty(s)
        } else {
            let mut all = cones.clone();
            all.push(Cone { projection: pr.matrix.clone(), form: g.clone() });
            let w = CurveWitness::on_config(s, kp, CurveRepr::Cones(all))?;
            if kp == 1 {
                as_line(s, w)?
            } else {
                w
            }
        };
        let labels = witness.labels().to_vec();
        if (labels.len() as i64) < guaranteed {
            return Err(Error::MathAssertion(format!(
                "component split covers {} labels, below |S| - (k-k')(k^2-k') = {}",
                labels.len(),
                guaranteed
            )));
        }
        return Ok(SplitResult { k_prime: kp, labels, witness, guaranteed, resultant_degree: r.degree() });
    }
    Err(last_err)
}

// A degree-1 witness whose labels are collinear becomes an explicit line.
fn as_line(s: &PointConfig, w: CurveWitness) -> Result<CurveWitness> {
    let ls = w.labels();
    if ls.len() < 2 {
        return Ok(w);
    }
    let field = s.field();
    let (a, b) = (s.point(ls[0]), s.point(ls[1]));
    if !ls.iter().all(|&l| collinear(field, a, b, s.point(l))) {
        return Ok(w);
    }
    let line = LinearSubspace::from_points(field, s.ambient_dim(), &[a, b])?;
    let lw = CurveWitness::on_config(s, 1, CurveRepr::Line(line))?;
    if lw.labels() != w.labels() {
        return Ok(w);
    }
    Ok(lw)
}

/// Resultant, with respect to the coordinate along the center of `a`, of
/// the two cones, as a plane form of degree `k^2` in the coordinates of `a`.
fn cone_resultant<R: Rng + ?Sized>(
    field: &Field,
    a: &Matrix,
    k1: &Cone,
    k2: &Cone,
    k: usize,
    rng: &mut R,
) -> Result<Form> {
    // y = M x with M = [a; v], so the center becomes (0:0:0:1)
    let mut m = a.clone();
    let inv = loop {
        let v: Vec<Elem> = (0..4).map(|_| field.random_prime(rng)).collect();
        m.truncate(3);
        m.push(v);
        if let Some(inv) = linalg::inverse(field, &m) {
            break inv;
        }
    };
    let k1y = k1.form.compose_linear(&linalg::mat_mul(field, &k1.projection, &inv, 4))?;
    let k2y = k2.form.compose_linear(&linalg::mat_mul(field, &k2.projection, &inv, 4))?;
    let dd = k * k;
    let nodes = field.distinct_elements(dd + 1)?;
    // values on the grid y0 = 1, y1 = nodes[i], y2 = nodes[j]
    let mut rows_by_a: Vec<UniPoly> = Vec::with_capacity(nodes.len());
    for ai in &nodes {
        let mut vals = Vec::with_capacity(nodes.len());
        for bj in &nodes {
            let f1 = restrict_last(&k1y, ai, bj, k);
            let f2 = restrict_last(&k2y, ai, bj, k);
            vals.push(linalg::det(field, &sylvester(field, &f1, &f2)));
        }
        rows_by_a.push(interpolate(field, &nodes, &vals)?);
    }
    let mut terms = Vec::new();
    for j in 0..=dd {
        let col: Vec<Elem> = rows_by_a.iter().map(|p| p.coeff(j)).collect();
        let pa = interpolate(field, &nodes, &col)?;
        for (i, c) in pa.coeffs().iter().enumerate() {
            if field.is_zero(c) {
                continue;
            }
            if i + j > dd {
                return Err(Error::MathAssertion("resultant exceeds its expected degree".into()));
            }
            terms.push((vec![(dd - i - j) as u32, i as u32, j as u32], c.clone()));
        }
    }
    if terms.is_empty() {
        return Err(Error::Degenerate("cone resultant vanishes identically".into()));
    }
    Form::from_terms(field, 3, dd, &terms)
}

// coefficients in y3 of f(1, a, b, y3), formal degree k
fn restrict_last(f: &Form, a: &Elem, b: &Elem, k: usize) -> Vec<Elem> {
    let field = f.field();
    let mut out = vec![field.zero(); k + 1];
    for (e, c) in f.terms() {
        let v = field.mul(c, &field.mul(&field.pow(a, e[1] as u64), &field.pow(b, e[2] as u64)));
        out[e[3] as usize] = field.add(&out[e[3] as usize], &v);
    }
    out
}

fn sylvester(field: &Field, f: &[Elem], g: &[Elem]) -> Matrix {
    let (df, dg) = (f.len() - 1, g.len() - 1);
    let n = df + dg;
    let mut m = linalg::zeros(field, n, n);
    for i in 0..dg {
        for (j, c) in f.iter().rev().enumerate() {
            m[i][i + j] = c.clone();
        }
    }
    for i in 0..df {
        for (j, c) in g.iter().rev().enumerate() {
            m[dg + i][i + j] = c.clone();
        }
    }
    m
}

/// Lagrange interpolation through `(nodes[i], values[i])`.
pub fn interpolate(field: &Field, nodes: &[Elem], values: &[Elem]) -> Result<UniPoly> {
    let mut out = UniPoly::zero(field);
    for (i, xi) in nodes.iter().enumerate() {
        if field.is_zero(&values[i]) {
            continue;
        }
        let mut basis = UniPoly::constant(field, field.one());
        let mut denom = field.one();
        for (j, xj) in nodes.iter().enumerate() {
            if i == j {
                continue;
            }
            basis = basis.mul(&UniPoly::new(field, vec![field.neg(xj), field.one()]));
            denom = field.mul(&denom, &field.sub(xi, xj));
        }
        out = out.add(&basis.scale(&field.div(&values[i], &denom)?));
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct ChainStep {
    pub ambient_dim: usize,
    pub degree_in: usize,
    pub degree_out: usize,
    pub covered: usize,
    /// Lower bound promised at this step.
    pub guaranteed: i64,
}

#[derive(Clone, Debug)]
pub struct BootstrapResult {
    pub k_prime: usize,
    pub labels: Vec<usize>,
    pub witness: CurveWitness,
    pub chain: Vec<ChainStep>,
    /// Reducedness of the plane factor (base case, or the projected curve in `P^3`).
    pub reduced: bool,
    pub inconclusive: bool,
}

/// Recovers a low-degree curve through most of a CB(r) configuration by
/// projecting down to the plane, fitting there, and lifting back through
/// the component split.
pub fn bootstrap_curve<R: Rng + ?Sized>(s: &PointConfig, r: usize, k: usize, rng: &mut R) -> Result<BootstrapResult> {
    if k == 0 {
        return Err(Error::Precondition("curve degree must be at least 1".into()));
    }
    let m = s.len() as i64;
    let (ki, ri) = (k as i64, r as i64);
    let cap = (ki + 1) * ri - (ki * ki - ki - 1);
    if m > cap {
        return Err(Error::Precondition(format!("m = {} exceeds (k+1)r-(k^2-k-1) = {}", m, cap)));
    }
    if ri < 2 * ki - 1 {
        return Err(Error::Precondition(format!("r = {} is below 2k-1 = {}", r, 2 * k - 1)));
    }
    let v = cb_satisfies(s, r)?;
    if !v.satisfied {
        return Err(Error::Precondition(format!("configuration fails CB({}) at label {}", r, v.failing[0])));
    }
    match s.ambient_dim() {
        2 => {
            let sq = plane_base(s, k)?.ok_or_else(|| {
                Error::MathAssertion(format!("CB({}) configuration of {} points lies on no curve of degree <= {}", r, m, k))
            })?;
            let kp = sq.form.degree();
            let repr = if kp == 1 { plane_line_witness(s, &sq.form)? } else { CurveRepr::Plane(sq.form.clone()) };
            let witness = CurveWitness::on_config(s, kp, repr)?;
            if witness.labels().len() != s.len() {
                return Err(Error::MathAssertion("squarefree part lost points of the fit".into()));
            }
            let labels = witness.labels().to_vec();
            let step = ChainStep { ambient_dim: 2, degree_in: k, degree_out: kp, covered: labels.len(), guaranteed: m };
            Ok(BootstrapResult {
                k_prime: kp,
                labels,
                witness,
                chain: vec![step],
                reduced: sq.reduced,
                inconclusive: sq.inconclusive,
            })
        }
        3 => {
            for _ in 0..PROJECTION_RETRIES {
                let pr = random_projection(s, 2, rng)?;
                let Some(sq) = plane_base(&pr.image, k)? else {
                    continue;
                };
                let k0 = sq.form.degree();
                let split = split_with(s, k0, &pr, &sq.form, rng)?;
                let kp = split.k_prime;
                let covered = split.labels.len() as i64;
                let total = m - (ki - kp as i64) * (ki * ki - kp as i64);
                // m - (k-k0)(k^2-k0) - (k0-k')(k0^2-k') >= m - (k-k')(k^2-k')
                let first = m - (ki - k0 as i64) * (ki * ki - k0 as i64);
                let second = first - (k0 as i64 - kp as i64) * ((k0 * k0) as i64 - kp as i64);
                if second < total || covered < total {
                    return Err(Error::MathAssertion(format!(
                        "bootstrap chain bound violated: covered {}, chain {}, target {}",
                        covered, second, total
                    )));
                }
                let chain = vec![
                    ChainStep { ambient_dim: 2, degree_in: k, degree_out: k0, covered: s.len(), guaranteed: first },
                    ChainStep { ambient_dim: 3, degree_in: k0, degree_out: kp, covered: covered as usize, guaranteed: total },
                ];
                return Ok(BootstrapResult {
                    k_prime: kp,
                    labels: split.labels,
                    witness: split.witness,
                    chain,
                    reduced: sq.reduced,
                    inconclusive: sq.inconclusive,
                });
            }
            Err(Error::MathAssertion(format!(
                "no generic projection of the CB({}) configuration lies on a curve of degree <= {}",
                r, k
            )))
        }
        n if n < 2 => Err(Error::Precondition("curve bootstrap needs N >= 2".into())),
        n => Err(Error::Unsupported(format!("space-curve machinery covers P^3 only, got P^{}", n))),
    }
}

// minimal-degree fit j <= k followed by its squarefree part
fn plane_base(s: &PointConfig, k: usize) -> Result<Option<Squarefree>> {
    for j in 1..=k {
        if let Some(f) = plane_curve_fit(s, j)? {
            return Ok(Some(squarefree_part(&f)?));
        }
    }
    Ok(None)
}

#[derive(Clone, Debug)]
pub struct Pigeonhole {
    pub degree: usize,
    pub labels: Vec<usize>,
    pub member: CurveWitness,
    /// `ceil(k''/k' * m')`.
    pub promised: usize,
}

/// Picks the member with the best labels-per-degree ratio; it covers at
/// least `ceil(k''/k' * m')` labels.
pub fn pigeonhole_component(w: &CurveWitness) -> Result<Pigeonhole> {
    if w.degree() == 0 || w.labels().is_empty() {
        return Err(Error::Degenerate("pigeonhole needs a nonempty witness of positive degree".into()));
    }
    let members = w.members();
    let mut best = 0;
    for (i, m) in members.iter().enumerate() {
        if m.degree() == 0 {
            continue;
        }
        let b = members[best];
        // labels_i / deg_i > labels_b / deg_b
        if b.degree() == 0 || m.labels().len() * b.degree() > b.labels().len() * m.degree() {
            best = i;
        }
    }
    let member = members[best].clone();
    let kp = w.degree();
    let promised = (member.degree() * w.labels().len()).div_ceil(kp);
    if member.labels().len() < promised {
        return Err(Error::MathAssertion(format!(
            "pigeonhole member covers {} < {} labels",
            member.labels().len(),
            promised
        )));
    }
    Ok(Pigeonhole { degree: member.degree(), labels: member.labels().to_vec(), member, promised })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlaneFactorization {
    /// Factors over the field of definition, with repetition.
    pub factors: Vec<Form>,
    /// False when the degree/field size is beyond the implemented searches.
    pub complete: bool,
}

/// Line-search limit for plane-curve factorization.
pub const LINE_SEARCH_LIMIT: u64 = 1024;
/// Conic-search limit for plane quartics.
pub const CONIC_SEARCH_LIMIT: u64 = 17;

/// Factors a plane curve of degree at most 4 over its field of definition.
pub fn factor_plane_curve(f: &Form) -> Result<PlaneFactorization> {
    if f.nvars() != 3 || f.is_zero() {
        return Err(Error::Precondition("factorization expects a nonzero ternary form".into()));
    }
    let d = f.degree();
    if d > 4 {
        return Ok(PlaneFactorization { factors: vec![f.normalized()], complete: false });
    }
    if d <= 1 {
        return Ok(PlaneFactorization { factors: vec![f.normalized()], complete: true });
    }
    let field = f.field();
    let q = field.order_u64();
    let p = field.characteristic();
    if d == 2 && p != 2 {
        return factor_conic(f);
    }
    let mut factors = Vec::new();
    let mut rest = f.normalized();
    if q.map(|q| q <= LINE_SEARCH_LIMIT).unwrap_or(false) {
        while rest.degree() >= 2 {
            match find_line_factor(&rest)? {
                Some(l) => {
                    rest = form_div_exact(&rest, &l)?.normalized();
                    factors.push(l);
                }
                None => break,
            }
        }
        if rest.degree() == 1 {
            factors.push(rest);
            return Ok(PlaneFactorization { factors, complete: true });
        }
        if rest.degree() == 2 && p != 2 {
            let sub = factor_conic(&rest)?;
            factors.extend(sub.factors);
            return Ok(PlaneFactorization { factors, complete: sub.complete });
        }
        if rest.degree() == 3 || (rest.degree() == 2 && p == 2) {
            // no linear factor left: irreducible over the field
            factors.push(rest);
            return Ok(PlaneFactorization { factors, complete: true });
        }
        // quartic without linear factors
        if q.unwrap() <= CONIC_SEARCH_LIMIT {
            if let Some(c) = find_conic_factor(&rest)? {
                let other = form_div_exact(&rest, &c)?.normalized();
                factors.push(c);
                factors.push(other);
            } else {
                factors.push(rest);
            }
            return Ok(PlaneFactorization { factors, complete: true });
        }
        factors.push(rest);
        return Ok(PlaneFactorization { factors, complete: false });
    }
    factors.push(rest);
    Ok(PlaneFactorization { factors, complete: false })
}

fn factor_conic(f: &Form) -> Result<PlaneFactorization> {
    let field = f.field();
    // symmetric matrix with 2 on the diagonal: Q(x) = x^T M x / 2
    let idx = |e: [u32; 3]| f.basis().index_of(&e).unwrap();
    let c = |e: [u32; 3]| f.coeffs()[idx(e)].clone();
    let two = field.from_i64(2);
    let m: Matrix = vec![
        vec![field.mul(&two, &c([2, 0, 0])), c([1, 1, 0]), c([1, 0, 1])],
        vec![c([1, 1, 0]), field.mul(&two, &c([0, 2, 0])), c([0, 1, 1])],
        vec![c([1, 0, 1]), c([0, 1, 1]), field.mul(&two, &c([0, 0, 2]))],
    ];
    let (rank, ker) = linalg::rank_and_kernel(field, &m, 3);
    match rank {
        3 => Ok(PlaneFactorization { factors: vec![f.normalized()], complete: true }),
        1 => {
            let row = m.iter().find(|r| r.iter().any(|x| !field.is_zero(x))).unwrap().clone();
            let l = Form::linear(field, row).normalized();
            Ok(PlaneFactorization { factors: vec![l.clone(), l], complete: true })
        }
        2 => {
            let sing = ProjPoint::new(field, ker[0].clone())?;
            // restrict to a coordinate line missing the singular point
            let axis = (0..3).find(|&i| !field.is_zero(&sing.coords()[i])).unwrap();
            let (u, v) = match axis {
                0 => (1, 2),
                1 => (0, 2),
                _ => (0, 1),
            };
            // points on x_axis = 0: e_u + t e_v, plus e_v itself
            let mut pts = Vec::new();
            let mut ev = vec![field.zero(); 3];
            ev[v] = field.one();
            if field.is_zero(&f.eval(&ev)) {
                pts.push(ev.clone());
            }
            let mut coeffs = Vec::new();
            for e in f.basis().monomials().iter().zip(f.coeffs()).filter(|(e, _)| e[axis] == 0) {
                coeffs.push(e);
            }
            let mut uni = vec![field.zero(); 3];
            for (e, a) in coeffs {
                uni[e[v] as usize] = field.add(&uni[e[v] as usize], a);
            }
            let poly = UniPoly::new(field, uni);
            if !poly.is_zero() {
                for root in uni_roots(&poly, field)? {
                    let mut pt = vec![field.zero(); 3];
                    pt[u] = field.one();
                    pt[v] = root.value.clone();
                    pts.push(pt);
                }
            }
            if pts.is_empty() {
                // conjugate line pair: irreducible over the field
                return Ok(PlaneFactorization { factors: vec![f.normalized()], complete: true });
            }
            let mut factors = Vec::new();
            for pt in pts {
                let l = line_through(field, sing.coords(), &pt)?;
                factors.push(l);
            }
            if factors.len() == 1 {
                let l = factors[0].clone();
                let other = form_div_exact(&f.normalized(), &l)?.normalized();
                factors.push(other);
            }
            factors.sort_by(|a, b| a.coeffs().cmp(b.coeffs()));
            Ok(PlaneFactorization { factors, complete: true })
        }
        _ => Err(Error::Degenerate("zero conic".into())),
    }
}

fn line_through(field: &Field, a: &[Elem], b: &[Elem]) -> Result<Form> {
    let (_, ker) = linalg::rank_and_kernel(field, &[a.to_vec(), b.to_vec()], 3);
    if ker.len() != 1 {
        return Err(Error::Degenerate("line through coincident points".into()));
    }
    Ok(Form::linear(field, ker[0].clone()).normalized())
}

fn find_line_factor(f: &Form) -> Result<Option<Form>> {
    let field = f.field();
    let elems = field.elements(LINE_SEARCH_LIMIT)?;
    let z = field.zero();
    let o = field.one();
    let mut cands: Vec<Vec<Elem>> = vec![vec![z.clone(), z.clone(), o.clone()]];
    for b in &elems {
        cands.push(vec![z.clone(), o.clone(), b.clone()]);
    }
    for a in &elems {
        for b in &elems {
            cands.push(vec![o.clone(), a.clone(), b.clone()]);
        }
    }
    for c in cands {
        let l = Form::linear(field, c);
        if form_divides(&l, f) {
            return Ok(Some(l));
        }
    }
    Ok(None)
}

fn find_conic_factor(f: &Form) -> Result<Option<Form>> {
    let field = f.field();
    let elems = field.elements(CONIC_SEARCH_LIMIT)?;
    let n = elems.len();
    // normalized coefficient vectors: first nonzero entry is 1
    for lead in 0..6 {
        let free = 5 - lead;
        let total = n.pow(free as u32);
        for code in 0..total {
            let mut c = vec![field.zero(); 6];
            c[lead] = field.one();
            let mut x = code;
            for slot in c.iter_mut().skip(lead + 1) {
                *slot = elems[x % n].clone();
                x /= n;
            }
            let q = Form::new(field, 3, 2, c)?;
            if form_divides(&q, f) {
                return Ok(Some(q));
            }
        }
    }
    Ok(None)
}

/// Splits a witness into components by factoring its plane data: plane
/// curves directly, cone witnesses through their last (projected) form.
pub fn components(config: &PointConfig, w: &CurveWitness) -> Result<(CurveWitness, bool)> {
    let (parts, complete): (Vec<CurveRepr>, bool) = match w.repr() {
        CurveRepr::Plane(f) => {
            let fac = factor_plane_curve(f)?;
            (dedup_forms(fac.factors).into_iter().map(CurveRepr::Plane).collect(), fac.complete)
        }
        CurveRepr::Cones(cs) if cs.len() >= 3 => {
            let last = cs.last().unwrap();
            let fac = factor_plane_curve(&last.form)?;
            let parts = dedup_forms(fac.factors)
                .into_iter()
                .map(|g| {
                    let mut v = cs[..cs.len() - 1].to_vec();
                    v.push(Cone { projection: last.projection.clone(), form: g });
                    CurveRepr::Cones(v)
                })
                .collect();
            (parts, fac.complete)
        }
        _ => return Ok((w.clone(), true)),
    };
    if parts.len() <= 1 {
        return Ok((w.clone(), complete));
    }
    let members = parts
        .into_iter()
        .map(|rep| {
            let deg = match &rep {
                CurveRepr::Plane(f) => f.degree(),
                CurveRepr::Cones(cs) => cs.last().unwrap().form.degree(),
                _ => unreachable!(),
            };
            let rep = match (&rep, deg) {
                (CurveRepr::Plane(f), 1) => plane_line_witness(config, f)?,
                _ => rep,
            };
            let m = CurveWitness::on_config(config, deg, rep)?;
            if deg == 1 && m.ambient_dim() == 3 {
                as_line(config, m)
            } else {
                Ok(m)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let deg = members.iter().map(|m| m.degree()).sum();
    Ok((CurveWitness::on_config(config, deg, CurveRepr::Union(members))?, complete))
}

fn dedup_forms(mut v: Vec<Form>) -> Vec<Form> {
    let mut out: Vec<Form> = Vec::new();
    v.sort_by(|a, b| a.coeffs().cmp(b.coeffs()));
    for f in v {
        if !out.contains(&f) {
            out.push(f);
        }
    }
    out
}

/// Indices of the candidate points lying on the witness curve.
pub fn sample_on_witness(w: &CurveWitness, candidates: &[ProjPoint]) -> Vec<usize> {
    candidates.iter().enumerate().filter(|(_, p)| w.contains(p)).map(|(i, _)| i).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn lin(f: &Field, c: &[i64]) -> Form {
        Form::linear(f, c.iter().map(|&x| f.from_i64(x)).collect())
    }

    #[test]
    fn squarefree_examples() {
        let f = Field::prime(101).unwrap();
        let l = lin(&f, &[1, 2, 3]);
        let sq = squarefree_part(&l.mul(&l)).unwrap();
        assert_eq!(sq.form, l.normalized());
        assert!(!sq.reduced);
        let conic = Form::from_terms(
            &f,
            3,
            2,
            &[(vec![2, 0, 0], f.from_i64(1)), (vec![0, 2, 0], f.from_i64(1)), (vec![0, 0, 2], f.from_i64(-1))],
        )
        .unwrap();
        let sq = squarefree_part(&conic).unwrap();
        assert!(sq.reduced);
        let lc = l.mul(&conic);
        assert!(squarefree_part(&lc).unwrap().reduced);
    }

    #[test]
    fn conic_factorization_cases() {
        let f = Field::prime(101).unwrap();
        let l1 = lin(&f, &[1, 2, 3]);
        let l2 = lin(&f, &[0, 1, 7]);
        let fac = factor_plane_curve(&l1.mul(&l2)).unwrap();
        assert!(fac.complete);
        let mut want = vec![l1.normalized(), l2.normalized()];
        want.sort_by(|a, b| a.coeffs().cmp(b.coeffs()));
        assert_eq!(fac.factors, want);
        // x^2 + y^2 over F_7 is a pair of conjugate lines, irreducible over F_7
        let f7 = Field::prime(7).unwrap();
        let c = Form::from_terms(&f7, 3, 2, &[(vec![0, 2, 0], f7.one()), (vec![0, 0, 2], f7.one())]).unwrap();
        assert_eq!(factor_plane_curve(&c).unwrap().factors.len(), 1);
    }

    #[test]
    fn interpolation_recovers_polynomial() {
        let f = Field::prime(101).unwrap();
        let p = UniPoly::from_i64(&f, &[3, 0, 5, 1]);
        let nodes = f.distinct_elements(4).unwrap();
        let vals: Vec<Elem> = nodes.iter().map(|x| p.eval(x)).collect();
        assert_eq!(interpolate(&f, &nodes, &vals).unwrap(), p);
    }

    #[test]
    fn sylvester_resultant_of_linear_polys() {
        let f = Field::prime(101).unwrap();
        // res(t - 2, t - 5) = 2 - 5 up to sign
        let m = sylvester(&f, &[f.from_i64(-2), f.one()], &[f.from_i64(-5), f.one()]);
        let d = linalg::det(&f, &m);
        assert!(d == f.from_i64(3) || d == f.from_i64(-3));
    }

    #[test]
    fn line_in_space_splits_to_itself() {
        let f = Field::prime(101).unwrap();
        let pts: Vec<ProjPoint> = (0..6).map(|t| ProjPoint::from_i64(&f, &[1, t, 2 * t + 1, 3 - t]).unwrap()).collect();
        let s = PointConfig::new(&f, 3, pts).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let res = projection_component_split(&s, 1, &mut rng).unwrap();
        assert_eq!(res.k_prime, 1);
        assert_eq!(res.labels, (0..6).collect::<Vec<_>>());
        assert_eq!(res.witness.kind(), "line");
    }
}
