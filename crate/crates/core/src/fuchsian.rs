//! Group presentations, ball enumeration, double cosets of the cyclic
//! subgroup generated by gamma1, and the counting function N(X).

use std::collections::HashMap;
use std::path::Path;

use rayon::prelude::*;
use rug::{Float, Integer};
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::numerics::{cmp_float, diagonalize_primitive_hyperbolic, float_pow, Mat2, PrecisionContext};

/// Bundled Bolza surface group (genus two).
pub const BOLZA_JSON: &str = include_str!("../data/bolza.json");
/// Bundled cyclic group generated by diag(2, 1/2).
pub const CYCLIC_JSON: &str = include_str!("../data/cyclic.json");

/// How gamma1 is specified in a presentation.
#[derive(Clone, Debug)]
pub enum Gamma1 {
    /// Index of a hyperbolic generator; the group is conjugated so it becomes diagonal.
    Generator(usize),
    /// Generators are already conjugated so that gamma1 = diag(m, 1/m).
    Multiplier(Float),
}

#[derive(Clone, Debug)]
pub struct GroupPresentation {
    label: String,
    ctx: PrecisionContext,
    generators: Vec<Mat2>,
    names: Vec<String>,
    m: Float,
    len_l: Float,
    covolume: f64,
    conj: Mat2,
}

impl GroupPresentation {
    /// Builds a presentation. Inverses missing from `generators` are appended.
    pub fn new(
        ctx: &PrecisionContext,
        label: &str,
        generators: Vec<(String, Mat2)>,
        gamma1: Gamma1,
        covolume: f64,
    ) -> Result<Self> {
        if !(covolume > 0.0 && covolume.is_finite()) {
            return Err(Error::InvalidInput(format!("covolume must be positive, got {covolume}")));
        }
        let (conj, m) = match gamma1 {
            Gamma1::Generator(i) => {
                let (_, g) = generators.get(i).ok_or_else(|| {
                    Error::InvalidInput(format!("gamma1 generator index {i} out of range"))
                })?;
                diagonalize_primitive_hyperbolic(g, ctx)?
            }
            Gamma1::Multiplier(m) => (Mat2::identity(ctx), Float::with_val(ctx.bits(), m)),
        };
        if m <= 1.0 + ctx.tol_eq() {
            return Err(Error::InvalidInput("gamma1 multiplier must exceed 1".into()));
        }
        let conj_inv = conj.inverse(ctx);
        let mut names = Vec::new();
        let mut gens: Vec<Mat2> = Vec::new();
        for (name, g) in generators {
            let h = conj.mul(&g, ctx)?.mul(&conj_inv, ctx)?;
            names.push(name);
            gens.push(h);
        }
        let n = gens.len();
        for i in 0..n {
            let inv = gens[i].inverse(ctx);
            if !gens.iter().any(|h| h.approx_eq(&inv, ctx.tol_eq())) {
                names.push(format!("{}^-1", names[i]));
                gens.push(inv);
            }
        }
        let len_l = Float::with_val(ctx.bits(), m.ln_ref()) * 2u32;
        Ok(GroupPresentation {
            label: label.to_string(),
            ctx: *ctx,
            generators: gens,
            names,
            m,
            len_l,
            covolume,
            conj,
        })
    }

    /// The cyclic group generated by diag(m, 1/m).
    pub fn cyclic(ctx: &PrecisionContext, m: &Float, covolume: f64) -> Result<Self> {
        let g = Mat2::diag(ctx, m)?;
        GroupPresentation::new(ctx, "cyclic", vec![("h".into(), g)], Gamma1::Generator(0), covolume)
    }

    pub fn from_json_str(ctx: &PrecisionContext, text: &str, origin: &str) -> Result<Self> {
        let schema = |detail: String| Error::Schema {
            origin: origin.to_string(),
            detail,
        };
        let file: GroupFile = serde_json::from_str(text).map_err(|e| schema(e.to_string()))?;
        let covolume = match &file.covolume {
            NumOrStr::Num(x) => *x,
            NumOrStr::Str(s) => s
                .trim()
                .parse::<f64>()
                .map_err(|e| schema(format!("covolume: {e}")))?,
        };
        let mut gens = Vec::new();
        for g in &file.generators {
            let e = &g.entries;
            let mat = Mat2::parse(ctx, [&e[0], &e[1], &e[2], &e[3]])
                .map_err(|err| schema(format!("generator {}: {err}", g.name)))?;
            gens.push((g.name.clone(), mat));
        }
        let gamma1 = match (&file.gamma1.generator, &file.gamma1.m) {
            (Some(i), None) => Gamma1::Generator(*i),
            (None, Some(m)) => Gamma1::Multiplier(ctx.parse(m)?),
            _ => return Err(schema("gamma1 needs exactly one of 'generator' or 'm'".into())),
        };
        let group = GroupPresentation::new(ctx, &file.label, gens, gamma1, covolume)?;
        for rel in &file.relators {
            let w = group
                .parse_word(rel)
                .map_err(|e| schema(format!("relator: {e}")))?;
            let prod = group.evaluate_word(&w)?;
            let tol = ctx.tol_eq() * 16.0 * (w.len().max(1) as f64);
            if !prod.approx_eq(&Mat2::identity(ctx), tol) {
                return Err(schema(format!("relator {rel:?} does not evaluate to the identity")));
            }
        }
        Ok(group)
    }

    pub fn load(ctx: &PrecisionContext, path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Error::FileNotFound(path.display().to_string()),
            _ => Error::Io(e),
        })?;
        GroupPresentation::from_json_str(ctx, &text, &path.display().to_string())
    }

    pub fn bolza(ctx: &PrecisionContext) -> Result<Self> {
        GroupPresentation::from_json_str(ctx, BOLZA_JSON, "bundled bolza.json")
    }

    pub fn label(&self) -> &str {
        &self.label
    }
    pub fn ctx(&self) -> &PrecisionContext {
        &self.ctx
    }
    pub fn generators(&self) -> &[Mat2] {
        &self.generators
    }
    pub fn generator_names(&self) -> &[String] {
        &self.names
    }
    pub fn m(&self) -> &Float {
        &self.m
    }
    pub fn len_l(&self) -> &Float {
        &self.len_l
    }
    pub fn covolume(&self) -> f64 {
        self.covolume
    }
    /// The conjugator applied to the input generators.
    pub fn conjugator(&self) -> &Mat2 {
        &self.conj
    }
    pub fn gamma1(&self) -> Mat2 {
        Mat2::diag(&self.ctx, &self.m).expect("m > 1 is unimodular")
    }

    /// Leading coefficient 2 len^2 / (pi Vol).
    pub fn main_coefficient(&self) -> f64 {
        let l = self.len_l.to_f64();
        2.0 * l * l / (std::f64::consts::PI * self.covolume)
    }

    /// Parses tokens like "g1" or "g1^-1" into generator indices.
    pub fn parse_word(&self, tokens: &[String]) -> Result<Vec<u16>> {
        tokens
            .iter()
            .map(|tok| {
                let (name, inv) = match tok.strip_suffix("^-1") {
                    Some(n) => (n, true),
                    None => (tok.as_str(), false),
                };
                let i = self
                    .names
                    .iter()
                    .position(|n| n == name)
                    .ok_or_else(|| Error::InvalidInput(format!("unknown generator {name}")))?;
                if !inv {
                    return Ok(i as u16);
                }
                let target = self.generators[i].inverse(&self.ctx);
                self.generators
                    .iter()
                    .position(|h| h.approx_eq(&target, self.ctx.tol_eq()))
                    .map(|j| j as u16)
                    .ok_or_else(|| Error::InvalidInput(format!("no inverse for {name}")))
            })
            .collect()
    }

    pub fn evaluate_word(&self, word: &[u16]) -> Result<Mat2> {
        let mut acc = Mat2::identity(&self.ctx);
        for &i in word {
            acc = acc.mul(&self.generators[i as usize], &self.ctx)?;
        }
        Ok(acc)
    }

    /// Index of the inverse of each generator.
    fn inverse_table(&self) -> Vec<Option<usize>> {
        self.generators
            .iter()
            .map(|g| {
                let inv = g.inverse(&self.ctx);
                self.generators
                    .iter()
                    .position(|h| h.approx_eq(&inv, self.ctx.tol_eq()))
            })
            .collect()
    }
}

#[derive(Deserialize)]
struct GroupFile {
    #[allow(dead_code)]
    #[serde(default)]
    provenance: serde_json::Value,
    label: String,
    covolume: NumOrStr,
    gamma1: Gamma1Field,
    generators: Vec<GeneratorField>,
    #[serde(default)]
    relators: Vec<Vec<String>>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum NumOrStr {
    Num(f64),
    Str(String),
}

#[derive(Deserialize)]
struct Gamma1Field {
    generator: Option<usize>,
    m: Option<String>,
}

#[derive(Deserialize)]
struct GeneratorField {
    name: String,
    entries: [String; 4],
}

#[derive(Clone, Debug)]
pub struct GroupElement {
    pub mat: Mat2,
    pub word: Vec<u16>,
}

#[derive(Clone, Copy, Debug)]
pub struct EnumerationOptions {
    pub max_word_len: usize,
    pub safety_factor: f64,
}

impl Default for EnumerationOptions {
    fn default() -> Self {
        EnumerationOptions {
            max_word_len: 64,
            safety_factor: 4.0,
        }
    }
}

/// Result of a ball enumeration.
#[derive(Clone, Debug)]
pub struct Ball {
    pub norm_bound: f64,
    /// Elements with squared Frobenius norm at most `norm_bound`, in BFS order.
    pub elements: Vec<GroupElement>,
    /// New in-bound elements found at each word length (index 0 is the identity).
    pub layer_counts: Vec<usize>,
    /// Total number of elements visited, including those kept only for pruning slack.
    pub visited: usize,
}

/// Breadth-first enumeration of all elements with ||g||_F^2 <= norm_bound.
///
/// Partial words are pruned once their norm exceeds `norm_bound * safety_factor`.
pub fn enumerate_ball(
    group: &GroupPresentation,
    norm_bound: f64,
    opts: &EnumerationOptions,
) -> Result<Ball> {
    if !(norm_bound >= 2.0) {
        return Err(Error::InvalidInput(format!("norm bound must be at least 2, got {norm_bound}")));
    }
    if !(opts.safety_factor >= 1.0) {
        return Err(Error::InvalidInput("safety factor must be at least 1".into()));
    }
    let ctx = *group.ctx();
    let gens = group.generators();
    let inverse = group.inverse_table();
    let prune = norm_bound * opts.safety_factor;

    struct Node {
        mat: Mat2,
        parent: usize,
        letter: u16,
        norm: f64,
    }

    let identity = Mat2::identity(&ctx);
    let mut store: HashMap<[Integer; 4], usize> = HashMap::new();
    store.insert(identity.grid_key(&ctx), 0);
    let mut nodes = vec![Node {
        mat: identity,
        parent: usize::MAX,
        letter: 0,
        norm: 2.0,
    }];
    let mut layer_counts = vec![1usize];
    let mut frontier = vec![0usize];
    let mut exhausted = false;

    for _len in 1..=opts.max_word_len {
        if frontier.is_empty() {
            exhausted = true;
            break;
        }
        let candidates: Vec<Result<Option<(Mat2, [Integer; 4], usize, u16, f64)>>> = frontier
            .par_iter()
            .flat_map_iter(|&i| {
                let node = &nodes[i];
                let back = if node.parent == usize::MAX {
                    None
                } else {
                    inverse[node.letter as usize]
                };
                let ctx = &ctx;
                gens.iter().enumerate().filter_map(move |(j, g)| {
                    if Some(j) == back {
                        return None;
                    }
                    Some(node.mat.mul(g, ctx).map(|prod| {
                        let norm = prod.frob_sq().to_f64();
                        if norm <= prune {
                            let key = prod.grid_key(ctx);
                            Some((prod, key, i, j as u16, norm))
                        } else {
                            None
                        }
                    }))
                })
            })
            .collect();
        let mut next = Vec::new();
        let mut fresh_in_bound = 0usize;
        for cand in candidates {
            if let Some((mat, key, parent, letter, norm)) = cand? {
                if store.contains_key(&key) {
                    continue;
                }
                store.insert(key, nodes.len());
                if norm <= norm_bound {
                    fresh_in_bound += 1;
                }
                next.push(nodes.len());
                nodes.push(Node {
                    mat,
                    parent,
                    letter,
                    norm,
                });
            }
        }
        layer_counts.push(fresh_in_bound);
        frontier = next;
    }
    if frontier.is_empty() {
        exhausted = true;
    }
    if !exhausted {
        let n = layer_counts.len();
        if n >= 2 && layer_counts[n - 1] > 0 && layer_counts[n - 2] > 0 {
            return Err(Error::NonStabilized(format!(
                "word length {} still produced {} and {} new elements within norm bound {}",
                opts.max_word_len,
                layer_counts[n - 2],
                layer_counts[n - 1],
                norm_bound
            )));
        }
    }

    let word_of = |mut i: usize| {
        let mut w = Vec::new();
        while nodes[i].parent != usize::MAX {
            w.push(nodes[i].letter);
            i = nodes[i].parent;
        }
        w.reverse();
        w
    };
    let visited = nodes.len();
    let elements = (0..nodes.len())
        .filter(|&i| nodes[i].norm <= norm_bound)
        .map(|i| GroupElement {
            mat: nodes[i].mat.clone(),
            word: word_of(i),
        })
        .collect();
    Ok(Ball {
        norm_bound,
        elements,
        layer_counts,
        visited,
    })
}

/// Canonical representative of the double coset <gamma1> g <gamma1>.
///
/// The orbit is a -> m^u a, b -> m^v b, c -> m^-v c, d -> m^-u d with u = v (mod 2).
/// For a != 0, u puts |a| in [1, m) and v minimizes |b| + |c|; on an exact tie the
/// candidate with the larger |b| wins. If one of b, c vanishes, the other is put
/// in [1, m^2). For a = 0, v puts |b| in [1, m) and u puts |d| in [1, m^2).
pub fn canonical_rep(g: &Mat2, m: &Float, ctx: &PrecisionContext) -> Result<Mat2> {
    let p = ctx.bits();
    let tol = ctx.tol_eq();
    let snap = 1024.0 * tol;
    let ln_m = Float::with_val(p, m.ln_ref());
    let log_m = |x: &Float| Float::with_val(p, x.abs_ref()).ln() / &ln_m;
    let floor_snap = |x: Float| -> i64 {
        let r = Float::with_val(p, x.round_ref());
        let diff = Float::with_val(p, &x - &r).abs();
        let chosen = if diff <= snap { r } else { x.floor() };
        chosen.to_f64() as i64
    };
    let small = |x: &Float| x.as_abs().to_f64() <= tol;
    let odd = |k: i64| k.rem_euclid(2) == 1;
    let (a, b, c, d) = (g.a(), g.b(), g.c(), g.d());

    let (u, v) = if !small(a) {
        let u = -floor_snap(log_m(a));
        let v = if !small(b) && !small(c) {
            let vstar = Float::with_val(p, log_m(c) - log_m(b)) / 2u32;
            let mut lo = vstar.floor().to_f64() as i64;
            if odd(lo - u) {
                lo -= 1;
            }
            let hi = lo + 2;
            let cost = |v: i64| {
                Float::with_val(p, b.abs_ref()) * float_pow(m, v)
                    + Float::with_val(p, c.abs_ref()) * float_pow(m, -v)
            };
            let (cl, ch) = (cost(lo), cost(hi));
            let gap = Float::with_val(p, &cl - &ch);
            let scale = Float::with_val(p, &cl + &ch);
            if Float::with_val(p, gap.abs_ref()) <= scale * snap {
                hi
            } else if gap.is_sign_negative() {
                lo
            } else {
                hi
            }
        } else if !small(b) {
            let mut v = -floor_snap(log_m(b));
            if odd(v - u) {
                v += 1;
            }
            v
        } else if !small(c) {
            let mut v = floor_snap(log_m(c));
            if odd(v - u) {
                v -= 1;
            }
            v
        } else {
            u
        };
        (u, v)
    } else {
        if small(b) {
            return Err(Error::Degenerate("both a and b vanish".into()));
        }
        let v = -floor_snap(log_m(b));
        let u = if !small(d) {
            let mut u = floor_snap(log_m(d));
            if odd(u - v) {
                u -= 1;
            }
            u
        } else {
            v
        };
        (u, v)
    };

    let scale = |x: &Float, k: i64| {
        if k >= 0 {
            Float::with_val(p, x * float_pow(m, k))
        } else {
            Float::with_val(p, x / float_pow(m, -k))
        }
    };
    let mut out = Mat2::new(ctx, scale(a, u), scale(b, v), scale(c, -v), scale(d, -u))?;
    out.normalize_sign(ctx);
    Ok(out)
}

/// True iff g1 and g2 lie in the same double coset.
pub fn same_double_coset(g1: &Mat2, g2: &Mat2, m: &Float, ctx: &PrecisionContext) -> Result<bool> {
    let r1 = canonical_rep(g1, m, ctx)?;
    let r2 = canonical_rep(g2, m, ctx)?;
    Ok(r1.approx_eq(&r2, ctx.tol_eq()))
}

#[derive(Clone, Debug)]
pub struct DoubleCosetRep {
    pub rep: Mat2,
    pub b_value: Float,
    pub word: Vec<u16>,
    /// True iff the a or b entry of the representative vanishes.
    pub zero_flag: bool,
}

#[derive(Clone, Copy, Debug)]
pub struct CountOptions {
    pub margin: f64,
    pub enumeration: EnumerationOptions,
    /// Re-run the reduction at margin + 1 and require identical counts.
    pub certify: bool,
}

impl Default for CountOptions {
    fn default() -> Self {
        CountOptions {
            margin: 2.0,
            enumeration: EnumerationOptions::default(),
            certify: true,
        }
    }
}

/// Norm bound guaranteeing a representative of every coset with |B| <= x.
///
/// Translating by gamma1 on both sides moves the foot of the common perpendicular
/// on l and the image of i on g l to within len_l / 2 of the base points, so some
/// representative satisfies d(i, g i) <= arccosh x + len_l.
pub fn bridge_norm_bound(x: f64, len_l: f64, margin: f64) -> f64 {
    2.0 * (x.max(1.0).acosh() + len_l + margin).cosh()
}

/// All double cosets with |B| <= x_max, sorted by |B|.
#[derive(Clone, Debug)]
pub struct CosetTable {
    pub x_max: f64,
    pub margin: f64,
    pub norm_bound: f64,
    pub cosets: Vec<DoubleCosetRep>,
    /// Coset count at x_max found with margin + 1, when certified.
    pub certified_count: Option<usize>,
    pub elements_in_ball: usize,
    pub elements_visited: usize,
}

impl CosetTable {
    /// N(x) for x <= x_max.
    pub fn count(&self, x: f64, tol: f64) -> usize {
        self.cosets
            .partition_point(|r| r.b_value.as_abs().to_f64() <= x + tol)
    }

    /// Sorted |B| values.
    pub fn abs_b(&self) -> Vec<f64> {
        self.cosets.iter().map(|r| r.b_value.as_abs().to_f64()).collect()
    }
}

fn reduce_cosets(
    group: &GroupPresentation,
    ball: &Ball,
    x_max: f64,
    norm_limit: f64,
) -> Result<Vec<DoubleCosetRep>> {
    let ctx = group.ctx();
    let tol = ctx.tol_eq();
    let m = group.m();
    let mut reps: Vec<DoubleCosetRep> = ball
        .elements
        .par_iter()
        .filter(|e| {
            e.mat.b_invariant().as_abs().to_f64() <= x_max + tol
                && e.mat.frob_sq().to_f64() <= norm_limit
        })
        .map(|e| {
            let rep = canonical_rep(&e.mat, m, ctx)?;
            let b_value = rep.b_invariant();
            let zero_flag = rep.a().as_abs().to_f64() <= tol || rep.b().as_abs().to_f64() <= tol;
            Ok(DoubleCosetRep {
                rep,
                b_value,
                word: e.word.clone(),
                zero_flag,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    // Stable sort keeps the earliest witness first among equal representatives.
    reps.sort_by(|x, y| cmp_float(&Float::with_val(ctx.bits(), x.b_value.abs_ref()), &Float::with_val(ctx.bits(), y.b_value.abs_ref())));
    let mut out: Vec<DoubleCosetRep> = Vec::new();
    let mut run_start = 0usize;
    for r in reps {
        let babs = r.b_value.as_abs().to_f64();
        while run_start < out.len() {
            let prev = out[run_start].b_value.as_abs().to_f64();
            if babs - prev > 1e3 * tol * babs.max(1.0) {
                run_start += 1;
            } else {
                break;
            }
        }
        if out[run_start..].iter().any(|o| o.rep.approx_eq(&r.rep, 64.0 * tol)) {
            continue;
        }
        out.push(r);
    }
    // Deterministic order: |B|, then entries.
    out.sort_by(|x, y| {
        let bx = Float::with_val(ctx.bits(), x.b_value.abs_ref());
        let by = Float::with_val(ctx.bits(), y.b_value.abs_ref());
        let close = Float::with_val(ctx.bits(), &bx - &by).abs() <= 1e3 * tol * bx.to_f64().max(1.0);
        if !close {
            return cmp_float(&bx, &by);
        }
        for (ex, ey) in x.rep.entries().into_iter().zip(y.rep.entries()) {
            let o = cmp_float(ex, ey);
            if o != std::cmp::Ordering::Equal {
                return o;
            }
        }
        std::cmp::Ordering::Equal
    });
    Ok(out)
}

/// Double cosets with |B| <= x_max.
pub fn coset_table(group: &GroupPresentation, x_max: f64, opts: &CountOptions) -> Result<CosetTable> {
    if !(x_max >= 1.0) {
        return Err(Error::InvalidInput(format!("X must be at least 1, got {x_max}")));
    }
    let len_l = group.len_l().to_f64();
    let bound = bridge_norm_bound(x_max, len_l, opts.margin);
    let enum_bound = if opts.certify {
        bridge_norm_bound(x_max, len_l, opts.margin + 1.0)
    } else {
        bound
    };
    let ball = enumerate_ball(group, enum_bound, &opts.enumeration)?;
    let cosets = reduce_cosets(group, &ball, x_max, bound)?;
    let certified_count = if opts.certify {
        let wide = reduce_cosets(group, &ball, x_max, enum_bound)?;
        if wide.len() != cosets.len() {
            return Err(Error::NonStabilized(format!(
                "coset count changed from {} to {} when the margin grew from {} to {}",
                cosets.len(),
                wide.len(),
                opts.margin,
                opts.margin + 1.0
            )));
        }
        Some(wide.len())
    } else {
        None
    };
    let elements_in_ball = ball
        .elements
        .iter()
        .filter(|e| e.mat.frob_sq().to_f64() <= bound)
        .count();
    Ok(CosetTable {
        x_max,
        margin: opts.margin,
        norm_bound: bound,
        cosets,
        certified_count,
        elements_in_ball,
        elements_visited: ball.visited,
    })
}

#[derive(Clone, Debug)]
pub struct CountResult {
    pub x: f64,
    pub count: usize,
    pub cosets: Vec<DoubleCosetRep>,
    pub certified_count: Option<usize>,
}

/// N(X) = #{double cosets with |B| <= X}.
pub fn count_n(group: &GroupPresentation, x: f64, opts: &CountOptions) -> Result<CountResult> {
    let table = coset_table(group, x, opts)?;
    Ok(CountResult {
        x,
        count: table.cosets.len(),
        certified_count: table.certified_count,
        cosets: table.cosets,
    })
}

#[derive(Clone, Debug)]
pub struct ZeroDiagonalReport {
    pub found: bool,
    pub witness: Option<GroupElement>,
    pub search_bound: f64,
    /// Always true: absence is only established inside the searched ball.
    pub bounded_search: bool,
}

/// Searches the ball of the given norm bound for an element with a = d = 0.
pub fn detect_zero_diagonal(
    group: &GroupPresentation,
    search_bound: f64,
    opts: &EnumerationOptions,
) -> Result<ZeroDiagonalReport> {
    let ball = enumerate_ball(group, search_bound, opts)?;
    let tol = group.ctx().tol_eq();
    let witness = ball
        .elements
        .into_iter()
        .find(|e| e.mat.a().as_abs().to_f64() <= tol && e.mat.d().as_abs().to_f64() <= tol);
    Ok(ZeroDiagonalReport {
        found: witness.is_some(),
        witness,
        search_bound,
        bounded_search: true,
    })
}
