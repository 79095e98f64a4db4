//! Homogeneous forms, and the bivariate gcd / exact division machinery used
//! to take squarefree parts and common components of plane curves.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::{Elem, Field, UniPoly};
use crate::projective::{MonomialBasis, ProjPoint};

/// A homogeneous form of fixed degree, coefficients indexed by
/// [`MonomialBasis`] order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Form {
    field: Field,
    basis: Arc<MonomialBasis>,
    coeffs: Vec<Elem>,
}

impl Form {
    pub fn new(field: &Field, nvars: usize, degree: usize, coeffs: Vec<Elem>) -> Result<Self> {
        let basis = MonomialBasis::new(nvars - 1, degree);
        if coeffs.len() != basis.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} coefficients for {} monomials",
                coeffs.len(),
                basis.len()
            )));
        }
        Ok(Form { field: field.clone(), basis: Arc::new(basis), coeffs })
    }

    pub fn zero(field: &Field, nvars: usize, degree: usize) -> Self {
        let basis = MonomialBasis::new(nvars - 1, degree);
        let coeffs = vec![field.zero(); basis.len()];
        Form { field: field.clone(), basis: Arc::new(basis), coeffs }
    }

    pub fn from_terms(field: &Field, nvars: usize, degree: usize, terms: &[(Vec<u32>, Elem)]) -> Result<Self> {
        let mut f = Self::zero(field, nvars, degree);
        for (e, c) in terms {
            let i = f
                .basis
                .index_of(e)
                .ok_or_else(|| Error::DimensionMismatch(format!("monomial {:?} is not of degree {}", e, degree)))?;
            f.coeffs[i] = field.add(&f.coeffs[i], c);
        }
        Ok(f)
    }

    /// The linear form `sum c_i x_i`.
    pub fn linear(field: &Field, coeffs: Vec<Elem>) -> Self {
        let n = coeffs.len();
        Form::new(field, n, 1, coeffs).expect("linear form")
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn nvars(&self) -> usize {
        self.basis.ambient_dim() + 1
    }

    pub fn degree(&self) -> usize {
        self.basis.degree()
    }

    pub fn basis(&self) -> &MonomialBasis {
        &self.basis
    }

    pub fn coeffs(&self) -> &[Elem] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| self.field.is_zero(c))
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Elem)> {
        self.basis.monomials().iter().zip(&self.coeffs).filter(|(_, c)| !self.field.is_zero(c))
    }

    pub fn eval(&self, coords: &[Elem]) -> Elem {
        let f = &self.field;
        let mut acc = f.zero();
        let vals = self.basis.eval(f, coords);
        for (v, c) in vals.iter().zip(&self.coeffs) {
            if !f.is_zero(c) && !f.is_zero(v) {
                acc = f.add(&acc, &f.mul(v, c));
            }
        }
        acc
    }

    pub fn vanishes_at(&self, p: &ProjPoint) -> bool {
        self.field.is_zero(&self.eval(p.coords()))
    }

    pub fn scale(&self, c: &Elem) -> Self {
        let mut out = self.clone();
        out.coeffs = self.coeffs.iter().map(|a| self.field.mul(a, c)).collect();
        out
    }

    /// Scaled so the first nonzero coefficient is 1.
    pub fn normalized(&self) -> Self {
        match self.coeffs.iter().find(|c| !self.field.is_zero(c)) {
            None => self.clone(),
            Some(c) => self.scale(&self.field.inv(c).unwrap()),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.basis != other.basis {
            return Err(Error::DimensionMismatch("adding forms of different shape".into()));
        }
        let mut out = self.clone();
        out.coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| self.field.add(a, b)).collect();
        Ok(out)
    }

    pub fn mul(&self, other: &Self) -> Self {
        let f = &self.field;
        let mut out = Form::zero(f, self.nvars(), self.degree() + other.degree());
        for (ea, ca) in self.terms() {
            for (eb, cb) in other.terms() {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                let i = out.basis.index_of(&e).unwrap();
                out.coeffs[i] = f.add(&out.coeffs[i], &f.mul(ca, cb));
            }
        }
        out
    }

    pub fn pow(&self, e: usize) -> Self {
        let mut out = Form::new(&self.field, self.nvars(), 0, vec![self.field.one()]).unwrap();
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    /// Partial derivative with respect to `x_i` (zero form of degree 0 if
    /// the degree is already 0).
    pub fn partial(&self, i: usize) -> Self {
        let f = &self.field;
        let d = self.degree();
        if d == 0 {
            return self.scale(&f.zero());
        }
        let mut out = Form::zero(f, self.nvars(), d - 1);
        for (e, c) in self.terms() {
            if e[i] == 0 {
                continue;
            }
            let mut e2 = e.clone();
            e2[i] -= 1;
            let j = out.basis.index_of(&e2).unwrap();
            out.coeffs[j] = f.add(&out.coeffs[j], &f.mul(c, &f.from_i64(e[i] as i64)));
        }
        out
    }

    /// Applies Frobenius to every coefficient.
    pub fn frobenius_pow(&self, k: usize) -> Result<Self> {
        let mut out = self.clone();
        out.coeffs = self.coeffs.iter().map(|c| self.field.frobenius_pow(c, k)).collect::<Result<_>>()?;
        Ok(out)
    }

    /// `F(L_0(y), .., L_{n-1}(y))` where `L_i(y) = rows[i] . y`.
    pub fn compose_linear(&self, rows: &[Vec<Elem>]) -> Result<Self> {
        if rows.len() != self.nvars() {
            return Err(Error::DimensionMismatch("substitution has the wrong number of rows".into()));
        }
        let m = rows[0].len();
        let f = &self.field;
        let lin: Vec<Form> = rows.iter().map(|r| Form::linear(f, r.clone())).collect();
        let d = self.degree();
        let pows: Vec<Vec<Form>> = lin
            .iter()
            .map(|l| {
                let mut v = vec![Form::new(f, m, 0, vec![f.one()]).unwrap()];
                for i in 1..=d {
                    let next = v[i - 1].mul(l);
                    v.push(next);
                }
                v
            })
            .collect();
        let mut out = Form::zero(f, m, d);
        for (e, c) in self.terms() {
            let mut t = Form::new(f, m, 0, vec![c.clone()]).unwrap();
            for (i, &ei) in e.iter().enumerate() {
                if ei > 0 {
                    t = t.mul(&pows[i][ei as usize]);
                }
            }
            out = out.add(&t)?;
        }
        Ok(out)
    }

    /// Largest `a` with `x_0^a` dividing the form.
    pub fn x0_valuation(&self) -> usize {
        self.terms().map(|(e, _)| e[0] as usize).min().unwrap_or(0)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "nvars": self.nvars(),
            "degree": self.degree(),
            "coefficients": self.coeffs.iter().map(|c| self.field.elem_to_json(c)).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(field: &Field, v: &serde_json::Value) -> Result<Self> {
        let nvars = v["nvars"].as_u64().ok_or_else(|| Error::Parse("form needs nvars".into()))? as usize;
        let degree = v["degree"].as_u64().ok_or_else(|| Error::Parse("form needs degree".into()))? as usize;
        let coeffs = v["coefficients"]
            .as_array()
            .ok_or_else(|| Error::Parse("form needs coefficients".into()))?
            .iter()
            .map(|c| field.elem_from_json(c))
            .collect::<Result<Vec<_>>>()?;
        Form::new(field, nvars, degree, coeffs)
    }
}

/// Polynomial in `y` with coefficients in `K[x]`: `b[j]` is the coefficient of `y^j`.
pub type BiPoly = Vec<UniPoly>;

fn bi_trim(b: &mut BiPoly) {
    while b.last().map(|c| c.is_zero()).unwrap_or(false) {
        b.pop();
    }
}

fn bi_is_zero(b: &BiPoly) -> bool {
    b.iter().all(|c| c.is_zero())
}

/// Dehomogenizes a ternary form at `x_0 = 1`, with `x = x_1`, `y = x_2`.
pub fn dehomogenize(f: &Form) -> BiPoly {
    assert_eq!(f.nvars(), 3, "dehomogenize expects a ternary form");
    let field = f.field();
    let d = f.degree();
    let mut grid = vec![vec![field.zero(); d + 1]; d + 1];
    for (e, c) in f.terms() {
        grid[e[2] as usize][e[1] as usize] = c.clone();
    }
    let mut out: BiPoly = grid.into_iter().map(|row| UniPoly::new(field, row)).collect();
    bi_trim(&mut out);
    out
}

/// Total degree of a nonzero bivariate polynomial.
pub fn bi_total_degree(b: &BiPoly) -> Option<usize> {
    b.iter().enumerate().filter_map(|(j, c)| c.degree().map(|i| i + j)).max()
}

/// Homogenizes to the given degree (must be at least the total degree).
pub fn homogenize(field: &Field, b: &BiPoly, degree: usize) -> Form {
    let mut terms = Vec::new();
    for (j, c) in b.iter().enumerate() {
        for (i, a) in c.coeffs().iter().enumerate() {
            if !field.is_zero(a) {
                terms.push((vec![(degree - i - j) as u32, i as u32, j as u32], a.clone()));
            }
        }
    }
    Form::from_terms(field, 3, degree, &terms).expect("degree large enough")
}

fn bi_content(b: &BiPoly) -> UniPoly {
    let field = b[0].field().clone();
    let mut g = UniPoly::zero(&field);
    for c in b {
        g = g.gcd(c);
        if g.degree() == Some(0) {
            break;
        }
    }
    g
}

fn bi_div_scalar_poly(b: &BiPoly, c: &UniPoly) -> Result<BiPoly> {
    b.iter().map(|x| x.div_exact(c)).collect()
}

fn bi_primitive(b: &BiPoly) -> Result<BiPoly> {
    let c = bi_content(b);
    bi_div_scalar_poly(b, &c)
}

fn bi_scale(a: &BiPoly, c: &UniPoly) -> BiPoly {
    let mut out: BiPoly = a.iter().map(|x| x.mul(c)).collect();
    bi_trim(&mut out);
    out
}

fn bi_sub(a: &BiPoly, b: &BiPoly) -> BiPoly {
    let field = a.first().or(b.first()).unwrap().field().clone();
    let n = a.len().max(b.len());
    let z = UniPoly::zero(&field);
    let mut out: BiPoly = (0..n).map(|i| a.get(i).unwrap_or(&z).sub(b.get(i).unwrap_or(&z))).collect();
    bi_trim(&mut out);
    out
}

/// Pseudo-remainder of `a` by `b` in `y`.
fn bi_prem(a: &BiPoly, b: &BiPoly) -> BiPoly {
    let db = b.len() - 1;
    let lb = b[db].clone();
    let mut r = a.clone();
    while !r.is_empty() && r.len() > db {
        let dr = r.len() - 1;
        let lr = r[dr].clone();
        let mut shifted: BiPoly = vec![UniPoly::zero(lb.field()); dr - db];
        shifted.extend(b.iter().map(|c| c.mul(&lr)));
        r = bi_sub(&bi_scale(&r, &lb), &shifted);
    }
    r
}

/// Exact division in `K[x][y]`.
pub fn bi_div_exact(a: &BiPoly, b: &BiPoly) -> Result<BiPoly> {
    if bi_is_zero(b) {
        return Err(Error::DivisionByZero);
    }
    let field = b[0].field().clone();
    let db = b.len() - 1;
    let mut r = a.clone();
    bi_trim(&mut r);
    if r.is_empty() {
        return Ok(Vec::new());
    }
    if r.len() <= db {
        return Err(Error::MathAssertion("inexact bivariate division".into()));
    }
    let mut q = vec![UniPoly::zero(&field); r.len() - db];
    while !r.is_empty() {
        if r.len() <= db {
            return Err(Error::MathAssertion("inexact bivariate division".into()));
        }
        let dr = r.len() - 1;
        let c = r[dr].div_exact(&b[db])?;
        let mut shifted: BiPoly = vec![UniPoly::zero(&field); dr - db];
        shifted.extend(b.iter().map(|x| x.mul(&c)));
        q[dr - db] = c;
        r = bi_sub(&r, &shifted);
    }
    bi_trim(&mut q);
    Ok(q)
}

/// Gcd in `K[x][y]` by primitive remainder sequences (up to a scalar).
pub fn bi_gcd(a: &BiPoly, b: &BiPoly) -> Result<BiPoly> {
    if bi_is_zero(a) {
        return Ok(b.clone());
    }
    if bi_is_zero(b) {
        return Ok(a.clone());
    }
    let c = bi_content(a).gcd(&bi_content(b));
    let mut x = bi_primitive(a)?;
    let mut y = bi_primitive(b)?;
    if x.len() < y.len() {
        std::mem::swap(&mut x, &mut y);
    }
    loop {
        if y.len() == 1 {
            // y is a nonzero constant in y, primitive, hence a unit
            x = vec![UniPoly::constant(c.field(), c.field().one())];
            break;
        }
        let r = bi_prem(&x, &y);
        if r.is_empty() {
            x = y;
            break;
        }
        x = y;
        y = bi_primitive(&r)?;
    }
    let g = bi_primitive(&x)?;
    Ok(bi_scale(&g, &c))
}

/// Gcd of ternary forms (zero forms are ignored), normalized.
pub fn form_gcd(forms: &[&Form]) -> Result<Form> {
    let nz: Vec<&&Form> = forms.iter().filter(|f| !f.is_zero()).collect();
    let Some(first) = nz.first() else {
        return Err(Error::Degenerate("gcd of zero forms".into()));
    };
    let field = first.field().clone();
    let v = nz.iter().map(|f| f.x0_valuation()).min().unwrap();
    let mut g: BiPoly = Vec::new();
    for f in &nz {
        let stripped = strip_x0(f);
        g = bi_gcd(&g, &dehomogenize(&stripped))?;
    }
    let e = bi_total_degree(&g).unwrap();
    let h = homogenize(&field, &g, e);
    let x0 = Form::linear(&field, vec![field.one(), field.zero(), field.zero()]);
    Ok(h.mul(&x0.pow(v)).normalized())
}

/// Divides out the largest power of `x_0`.
pub fn strip_x0(f: &Form) -> Form {
    let v = f.x0_valuation();
    if v == 0 {
        return f.clone();
    }
    let terms: Vec<(Vec<u32>, Elem)> = f
        .terms()
        .map(|(e, c)| {
            let mut e2 = e.clone();
            e2[0] -= v as u32;
            (e2, c.clone())
        })
        .collect();
    Form::from_terms(f.field(), f.nvars(), f.degree() - v, &terms).unwrap()
}

/// Exact quotient of ternary forms.
pub fn form_div_exact(f: &Form, g: &Form) -> Result<Form> {
    let field = f.field().clone();
    let (a, b) = (f.x0_valuation(), g.x0_valuation());
    if a < b || g.degree() > f.degree() {
        return Err(Error::MathAssertion("form does not divide".into()));
    }
    let fs = strip_x0(f);
    let gs = strip_x0(g);
    let q = bi_div_exact(&dehomogenize(&fs), &dehomogenize(&gs))?;
    let h = homogenize(&field, &q, fs.degree() - gs.degree());
    let x0 = Form::linear(&field, vec![field.one(), field.zero(), field.zero()]);
    Ok(h.mul(&x0.pow(a - b)))
}

/// Whether `g` divides `f` (ternary forms).
pub fn form_divides(g: &Form, f: &Form) -> bool {
    if f.is_zero() {
        return true;
    }
    match form_div_exact(f, g) {
        Ok(q) => q.mul(g).normalized() == f.normalized(),
        Err(_) => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lin(f: &Field, c: &[i64]) -> Form {
        Form::linear(f, c.iter().map(|&x| f.from_i64(x)).collect())
    }

    #[test]
    fn gcd_and_division_of_products() {
        let f = Field::prime(101).unwrap();
        let l1 = lin(&f, &[1, 2, 3]);
        let l2 = lin(&f, &[0, 1, 5]);
        let l3 = lin(&f, &[1, 0, 0]);
        let a = l1.mul(&l2).mul(&l3);
        let b = l1.mul(&l3).mul(&l3);
        let g = form_gcd(&[&a, &b]).unwrap();
        assert_eq!(g, l1.mul(&l3).normalized());
        let q = form_div_exact(&a, &g).unwrap();
        assert_eq!(q.mul(&g).normalized(), a.normalized());
        assert!(form_divides(&l2, &a));
        assert!(!form_divides(&lin(&f, &[1, 1, 1]), &a));
    }

    #[test]
    fn gcd_over_rationals() {
        let q = Field::rational();
        let c = Form::from_terms(
            &q,
            3,
            2,
            &[(vec![2, 0, 0], q.from_i64(-1)), (vec![0, 2, 0], q.from_i64(1)), (vec![0, 0, 2], q.from_i64(1))],
        )
        .unwrap();
        let l = lin(&q, &[1, 1, 0]);
        let g = form_gcd(&[&c.mul(&l), &l.mul(&l)]).unwrap();
        assert_eq!(g, l.normalized());
        let g2 = form_gcd(&[&c, &l]).unwrap();
        assert_eq!(g2.degree(), 0);
    }

    #[test]
    fn compose_and_partials() {
        let f = Field::prime(7).unwrap();
        let x = lin(&f, &[1, 1]);
        let sq = x.pow(2);
        // d/dx0 (x0 + x1)^2 = 2 (x0 + x1)
        assert_eq!(sq.partial(0), x.scale(&f.from_i64(2)));
        let rows = vec![vec![f.from_i64(1), f.from_i64(0)], vec![f.from_i64(0), f.from_i64(-1)]];
        // (x0 - x1)^2
        let c = sq.compose_linear(&rows).unwrap();
        assert_eq!(c, lin(&f, &[1, -1]).pow(2));
    }
}
