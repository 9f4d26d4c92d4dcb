//! The two functorial factorizations of functors between finite categories, lifts
//! against Grothendieck opfibrations, the isomorphism exhibiting `1_•` as a left
//! map, and an exhaustive lift search used as an oracle.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::fincat::{
    arrow_cat, cocartesian_lifts, hom_functor, iso_cat, pullback_cat, terminal, ArrowCat, Family,
    FamilyMap, FinCat, FinCatError, Functor, FunctorSearch, GrothTotal, Pullback, SearchError, DEFAULT_NODE_CAP,
};
use crate::interp::{invert, ElimInstance};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum WfsError {
    #[error("the square does not commute")]
    NotCommuting,
    #[error("no cocartesian lift of `{arrow}` at `{object}`")]
    MissingLift { object: String, arrow: String },
    #[error("{count} fillers for the square at `{morphism}`, expected exactly one")]
    NotUnique { morphism: String, count: usize },
    #[error("lift fails: {0}")]
    Triangle(String),
    #[error(transparent)]
    FinCat(#[from] FinCatError),
    #[error(transparent)]
    Search(#[from] SearchError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Flavor {
    /// Through the arrow category `D^𝟚`.
    Arrow,
    /// Through the category of isomorphisms `D^𝕀`.
    Iso,
}

impl fmt::Display for Flavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Flavor::Arrow => "arrow",
            Flavor::Iso => "iso",
        })
    }
}

/// `F = right ∘ left` through `M = C ×_D D^𝟚` (or `D^𝕀`), the pullback of `F`
/// along the domain functor.
#[derive(Clone, Debug)]
pub struct Factorization {
    pub original: Functor,
    pub flavor: Flavor,
    pub middle: Arc<FinCat>,
    /// `c ↦ (c, id_{F c})`.
    pub left: Functor,
    /// `(c, f) ↦ cod f`.
    pub right: Functor,
    pub pullback: Pullback,
    pub arrows: ArrowCat,
}

pub fn factor(f: &Functor, flavor: Flavor) -> Factorization {
    let d = &f.target;
    let arrows = match flavor {
        Flavor::Arrow => arrow_cat(d),
        Flavor::Iso => iso_cat(d),
    };
    let pb = pullback_cat(f, &arrows.dom);
    let c = &f.source;
    let id_at = |x: usize| arrows.object(d.id(f.obj[x])).expect("identities are arrows");
    let obj: Vec<usize> = (0..c.object_count())
        .map(|x| pb.object(x, id_at(x)).expect("(c, id) lies in the pullback"))
        .collect();
    let mor = (0..c.morphism_count())
        .map(|m| {
            let (x, y) = (c.dom(m), c.cod(m));
            let sq = arrows
                .square(id_at(x), id_at(y), f.mor[m], f.mor[m])
                .expect("(Fu, Fu) is a square between identities");
            pb.morphism(m, sq).expect("(u, (Fu, Fu)) lies in the pullback")
        })
        .collect();
    let left = Functor::new_unchecked(c.clone(), pb.cat.clone(), obj, mor);
    let right = arrows.cod.after(&pb.right);
    Factorization {
        original: f.clone(),
        flavor,
        middle: pb.cat.clone(),
        left,
        right,
        pullback: pb,
        arrows,
    }
}

impl Factorization {
    /// Both legs are functors and compose to the original exactly.
    pub fn verify(&self) -> Result<(), FinCatError> {
        self.left.validate()?;
        self.right.validate()?;
        let composite = self.right.after(&self.left);
        if composite != self.original {
            return Err(FinCatError::Functor {
                name: "factorization".into(),
                reason: "legs do not compose to the original".into(),
            });
        }
        Ok(())
    }
}

/// A commuting square `p ∘ top = bottom ∘ i`:
///
/// ```text
/// A --top--> E
/// |i         |p
/// B --bot--> X
/// ```
#[derive(Clone, Debug)]
pub struct LiftingProblem {
    pub i: Functor,
    pub p: Functor,
    pub top: Functor,
    pub bottom: Functor,
}

impl LiftingProblem {
    pub fn new(i: Functor, p: Functor, top: Functor, bottom: Functor) -> Result<Self, WfsError> {
        let prob = LiftingProblem { i, p, top, bottom };
        if prob.p.after(&prob.top) != prob.bottom.after(&prob.i) {
            return Err(WfsError::NotCommuting);
        }
        Ok(prob)
    }
}

/// A diagonal `ℓ : B → E` with `ℓ ∘ i = top` and `p ∘ ℓ = bottom`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LiftWitness {
    pub lift: Functor,
}

impl LiftWitness {
    pub fn verify(&self, prob: &LiftingProblem) -> Result<(), WfsError> {
        self.lift
            .validate()
            .map_err(|e| WfsError::Triangle(format!("not a functor: {e}")))?;
        if self.lift.after(&prob.i) != prob.top {
            return Err(WfsError::Triangle("upper triangle does not commute".into()));
        }
        if prob.p.after(&self.lift) != prob.bottom {
            return Err(WfsError::Triangle("lower triangle does not commute".into()));
        }
        Ok(())
    }
}

/// The square witnessing that `p : E → B` is a right map:
/// `left leg : E → E ×_B B^𝟚` against `p`, with `id_E` on top and the right leg below.
pub fn opfibration_problem(p: &Functor) -> (LiftingProblem, Factorization) {
    let fact = factor(p, Flavor::Arrow);
    let prob = LiftingProblem {
        i: fact.left.clone(),
        p: p.clone(),
        top: Functor::identity(&p.source),
        bottom: fact.right.clone(),
    };
    (prob, fact)
}

/// The lift for an opfibration: `(e, f) ↦ ℓ(e, f)`, the codomain of the chosen
/// cocartesian lift of `f` at `e`, and on morphisms the unique filler of the square
/// formed with the two chosen lifts.
pub fn opfib_lift(p: &Functor) -> Result<(LiftingProblem, LiftWitness), WfsError> {
    let (prob, fact) = opfibration_problem(p);
    let (e, b) = (&*p.source, &*p.target);
    let lifts = cocartesian_lifts(p).map_err(|(x, f)| WfsError::MissingLift {
        object: e.object_name(x).into(),
        arrow: b.morphism_name(f).into(),
    })?;
    let m = &fact.middle;
    let pb = &fact.pullback;
    let arrows = &fact.arrows;
    // The chosen lift at each object (e, f) of the middle.
    let chosen: Vec<usize> = (0..m.object_count())
        .map(|o| {
            let x = pb.left.obj[o];
            let f = arrows.arrow(pb.right.obj[o]);
            lifts.get(x, f).expect("every arrow out of p(e) has a lift")
        })
        .collect();
    let obj: Vec<usize> = chosen.iter().map(|&l| e.cod(l)).collect();
    let mut mor = Vec::with_capacity(m.morphism_count());
    for k in 0..m.morphism_count() {
        let (o0, o1) = (m.dom(k), m.cod(k));
        let eps = pb.left.mor[k];
        let (_, phi) = arrows.square_parts(pb.right.mor[k]);
        let target = e.comp(chosen[o1], eps);
        let fillers: Vec<usize> = e
            .hom(obj[o0], obj[o1])
            .iter()
            .copied()
            .filter(|&w| p.mor[w] == phi && e.comp(w, chosen[o0]) == target)
            .collect();
        match fillers[..] {
            [w] => mor.push(w),
            _ => {
                return Err(WfsError::NotUnique {
                    morphism: m.morphism_name(k).into(),
                    count: fillers.len(),
                })
            }
        }
    }
    let witness = LiftWitness {
        lift: Functor::new_unchecked(m.clone(), p.source.clone(), obj, mor),
    };
    witness.verify(&prob)?;
    Ok((prob, witness))
}

/// `C^core.C.hom_C` with its levels and the functor `1_• : C^core → C^core.C.hom_C`.
#[derive(Clone, Debug)]
pub struct HomContext {
    pub core: GrothTotal,
    pub carrier: GrothTotal,
    pub hom: GrothTotal,
    pub one: Functor,
}

impl HomContext {
    pub fn new(c: &Arc<FinCat>) -> Result<Self, FinCatError> {
        let point = Arc::new(terminal());
        let closed = Family::constant(&point, c);
        let core = GrothTotal::new(&closed.core())?;
        let over_core = closed.reindex(&core.projection);
        let carrier = GrothTotal::new(&over_core)?;
        let down = core.projection.after(&carrier.projection);
        let t = closed.reindex(&down);
        let s = core
            .diagonal()
            .reindex(&carrier.projection)
            .map(&FamilyMap::op_inclusion(&t));
        let u = carrier.diagonal();
        let hom = GrothTotal::new(&hom_functor(&t, &s, &u)?)?;
        let c_core = Arc::new(c.core());
        let obj: Vec<usize> = (0..c.object_count())
            .map(|x| {
                let k = c.hom(x, x).iter().position(|&m| m == c.id(x)).expect("identity in hom(x, x)");
                hom.object(carrier.object(core.object(0, x), x), k)
            })
            .collect();
        let mor = obj.iter().map(|&o| hom.total.id(o)).collect();
        let one = Functor::new_unchecked(c_core, hom.total.clone(), obj, mor);
        Ok(HomContext {
            core,
            carrier,
            hom,
            one,
        })
    }

    /// `((x, y), f)` for an object, with `f` a morphism of `C`.
    pub fn unpack(&self, o: usize) -> (usize, usize, usize) {
        let (o2, k) = self.hom.object_pair(o);
        let (o1, y) = self.carrier.object_pair(o2);
        let (_, x) = self.core.object_pair(o1);
        let c = &self.carrier.family.fibers[o1];
        (x, y, c.hom(x, y)[k])
    }
}

/// `α : C^core.C.hom_C ≅ C^core ×_C C^𝟚` with its inverse, checked.
#[derive(Clone, Debug)]
pub struct AlphaIso {
    pub alpha: Functor,
    pub inverse: Functor,
    pub context: HomContext,
    /// The arrow factorization of `i : C^core → C`.
    pub factorization: Factorization,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlphaReport {
    pub functorial: bool,
    pub inverse: bool,
    /// `α ∘ 1_• = 1 × C^! i`.
    pub left_leg: bool,
}

impl AlphaReport {
    pub fn ok(&self) -> bool {
        self.functorial && self.inverse && self.left_leg
    }
}

pub fn alpha_iso(c: &Arc<FinCat>) -> Result<(AlphaIso, AlphaReport), WfsError> {
    let ctx = HomContext::new(c)?;
    let fact = factor(&c.core_inclusion(), Flavor::Arrow);
    let (pb, arrows) = (&fact.pullback, &fact.arrows);
    let total = &ctx.hom.total;
    let obj: Vec<usize> = (0..total.object_count())
        .map(|o| {
            let (x, _, f) = ctx.unpack(o);
            pb.object(x, arrows.object(f).expect("arrow object")).expect("(x, f) in the pullback")
        })
        .collect();
    let mor: Vec<usize> = (0..total.morphism_count())
        .map(|m| {
            let (x, y, _) = ctx.unpack(total.dom(m));
            let (_, y2, _) = ctx.unpack(total.cod(m));
            let (m2, _) = ctx.hom.morphism_pair(m);
            let (_, g) = ctx.carrier.morphism_pair(m2);
            debug_assert_eq!((c.dom(g), c.cod(g)), (y, y2));
            let (a, b) = (pb.right.obj[obj[total.dom(m)]], pb.right.obj[obj[total.cod(m)]]);
            let sq = arrows.square(a, b, c.id(x), g).expect("(1_x, g) is a square");
            pb.morphism(x, sq).expect("(1_x, g) in the pullback")
        })
        .collect();
    let alpha = Functor::new_unchecked(total.clone(), fact.middle.clone(), obj, mor);

    let m = &fact.middle;
    let inv_obj: Vec<usize> = (0..m.object_count())
        .map(|o| {
            let x = pb.left.obj[o];
            let f = arrows.arrow(pb.right.obj[o]);
            let y = c.cod(f);
            let k = c.hom(x, y).iter().position(|&h| h == f).expect("f in hom(x, y)");
            ctx.hom.object(ctx.carrier.object(ctx.core.object(0, x), y), k)
        })
        .collect();
    let inv_mor: Vec<usize> = (0..m.morphism_count())
        .map(|k| {
            let (_, g) = arrows.square_parts(pb.right.mor[k]);
            let dom = inv_obj[m.dom(k)];
            let (o2, _) = ctx.hom.object_pair(dom);
            let (o1, _) = ctx.carrier.object_pair(o2);
            let step = ctx
                .carrier
                .find_morphism(o2, ctx.core.total.id(o1), g)
                .expect("(1_x, g) in C^core.C");
            ctx.hom.chosen_lift(dom, step)
        })
        .collect();
    let inverse = Functor::new_unchecked(m.clone(), total.clone(), inv_obj, inv_mor);

    let functorial = alpha.validate().is_ok() && inverse.validate().is_ok();
    let round = functorial
        && alpha.after(&inverse) == Functor::identity(m)
        && inverse.after(&alpha) == Functor::identity(total)
        && invert(&alpha).as_ref() == Some(&inverse);
    let left_leg = alpha.after(&ctx.one) == fact.left;
    let report = AlphaReport {
        functorial,
        inverse: round,
        left_leg,
    };
    Ok((
        AlphaIso {
            alpha,
            inverse,
            context: ctx,
            factorization: fact,
        },
        report,
    ))
}

/// Every lift of the square, by exhaustive search. Exceeding `node_cap` is an error.
pub fn brute_force_lifts(prob: &LiftingProblem, node_cap: usize) -> Result<Vec<LiftWitness>, WfsError> {
    let (a, b, e) = (&prob.i.source, &prob.i.target, &prob.p.source);
    let mut search = FunctorSearch::new(b, e).node_cap(node_cap);
    for y in 0..b.object_count() {
        let mut allowed: Vec<usize> = (0..e.object_count())
            .filter(|&z| prob.p.obj[z] == prob.bottom.obj[y])
            .collect();
        for x in (0..a.object_count()).filter(|&x| prob.i.obj[x] == y) {
            allowed.retain(|&z| z == prob.top.obj[x]);
        }
        search = search.restrict_object(y, allowed);
    }
    for n in 0..b.morphism_count() {
        let mut allowed: Vec<usize> = (0..e.morphism_count())
            .filter(|&z| prob.p.mor[z] == prob.bottom.mor[n])
            .collect();
        for k in (0..a.morphism_count()).filter(|&k| prob.i.mor[k] == n) {
            allowed.retain(|&z| z == prob.top.mor[k]);
        }
        search = search.restrict_morphism(n, allowed);
    }
    Ok(search.all()?.into_iter().map(|lift| LiftWitness { lift }).collect())
}

/// The elimination square of an eliminator instance,
///
/// ```text
/// Γ.T^core.Θ --(1_•, d)--> Δ.D
///     |1_•                  |π
///     Δ ------- id -------> Δ
/// ```
///
/// together with the lift `e(d)` the interpreter computed.
pub fn elimination_problem(inst: &ElimInstance) -> Result<(LiftingProblem, LiftWitness), WfsError> {
    let upstairs = GrothTotal::new(&inst.motive)?;
    let top = upstairs.pair_functor(&inst.one, &inst.base);
    let delta = &inst.motive.base;
    let prob = LiftingProblem::new(
        inst.one.clone(),
        upstairs.projection.clone(),
        top,
        Functor::identity(delta),
    )?;
    let lift = LiftWitness {
        lift: upstairs.section_functor(&inst.section),
    };
    Ok((prob, lift))
}

/// `0 : * → 𝟚`, which has no cocartesian lift of the arrow `0 → 1`.
pub fn point_into_two() -> Functor {
    let two = Arc::new(crate::fincat::ordinal(2));
    Functor::constant(&Arc::new(terminal()), &two, 0)
}

/// Default search budget for [`brute_force_lifts`].
pub const LIFT_NODE_CAP: usize = DEFAULT_NODE_CAP;
