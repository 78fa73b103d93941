//! Identification of leaked hyperfine levels and their return to `|0⟩`.
//!
//! The ground manifold of Rb-87 has eight sublevels `(F, m_F)`. The qubit
//! lives in `(1,0)` and `(2,0)`; the other six are leakage levels. A QND
//! probe with a circularly polarised field reveals only a signature class:
//!
//! | class        | members              |
//! |--------------|----------------------|
//! | `Qubit`      | `(1,0)`, `(2,0)`     |
//! | `PlusTwo`    | `(2,+2)`             |
//! | `MinusTwo`   | `(2,−2)`             |
//! | `PairPlus`   | `(1,+1)`, `(2,−1)`   |
//! | `PairMinus`  | `(1,−1)`, `(2,+1)`   |
//!
//! Pair classes are split by swapping the `F = 1` member into `(2,0)` with a
//! state-selective transfer and probing again. Levels are tracked as
//! classical labels: the first probe collapses any superposition.

use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LevelLabel {
    f: u8,
    m: i8,
}

impl LevelLabel {
    pub const fn new_unchecked(f: u8, m: i8) -> Self {
        Self { f, m }
    }

    pub fn new(f: u8, m: i8) -> Result<Self> {
        if !(f == 1 || f == 2) || m.unsigned_abs() > f {
            return Err(Error::Domain(format!("no ground-state level F={f}, m_F={m}")));
        }
        Ok(Self { f, m })
    }

    pub fn f(&self) -> u8 {
        self.f
    }

    pub fn m(&self) -> i8 {
        self.m
    }

    pub fn is_qubit(&self) -> bool {
        self.m == 0
    }

    /// All eight levels, `F = 1` first.
    pub fn all() -> [LevelLabel; 8] {
        [
            Self { f: 1, m: -1 },
            Self { f: 1, m: 0 },
            Self { f: 1, m: 1 },
            Self { f: 2, m: -2 },
            Self { f: 2, m: -1 },
            Self { f: 2, m: 0 },
            Self { f: 2, m: 1 },
            Self { f: 2, m: 2 },
        ]
    }

    fn index(&self) -> usize {
        match self.f {
            1 => (self.m + 1) as usize,
            _ => (self.m + 5) as usize,
        }
    }
}

impl fmt::Display for LevelLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{:+}", self.f, self.m)
    }
}

impl std::str::FromStr for LevelLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Domain(format!("bad level label {s:?}, expected F,m"));
        let (f, m) = s.trim().split_once(',').ok_or_else(bad)?;
        let f: u8 = f.trim().parse().map_err(|_| bad())?;
        let m: i8 = m.trim().parse().map_err(|_| bad())?;
        Self::new(f, m)
    }
}

/// `|0⟩ = (F=1, m_F=0)`.
pub const GROUND: LevelLabel = LevelLabel::new_unchecked(1, 0);
/// `|1⟩ = (F=2, m_F=0)`.
pub const UPPER_QUBIT: LevelLabel = LevelLabel::new_unchecked(2, 0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SignatureClass {
    Qubit,
    PlusTwo,
    MinusTwo,
    /// `(1,+1)` and `(2,−1)`.
    PairPlus,
    /// `(1,−1)` and `(2,+1)`.
    PairMinus,
}

impl SignatureClass {
    pub const ALL: [SignatureClass; 5] = [
        SignatureClass::Qubit,
        SignatureClass::PlusTwo,
        SignatureClass::MinusTwo,
        SignatureClass::PairPlus,
        SignatureClass::PairMinus,
    ];

    pub fn id(&self) -> usize {
        *self as usize
    }

    pub fn members(&self) -> Vec<LevelLabel> {
        LevelLabel::all()
            .into_iter()
            .filter(|l| signature_of(*l) == *self)
            .collect()
    }
}

pub fn signature_of(level: LevelLabel) -> SignatureClass {
    match (level.f, level.m) {
        (_, 0) => SignatureClass::Qubit,
        (2, 2) => SignatureClass::PlusTwo,
        (2, -2) => SignatureClass::MinusTwo,
        (1, 1) | (2, -1) => SignatureClass::PairPlus,
        _ => SignatureClass::PairMinus,
    }
}

/// Phase shift imprinted by each class, used to decode probe readings.
/// The default uses symbolic units: the `±2` classes are opposite, as are
/// the two pair classes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignatureTable {
    phases: [f64; 5],
}

impl Default for SignatureTable {
    fn default() -> Self {
        Self {
            phases: [0.0, 2.0, -2.0, 1.0, -1.0],
        }
    }
}

impl SignatureTable {
    /// Phases in [`SignatureClass::ALL`] order. They must be pairwise
    /// distinct and the `±2` entries opposite.
    pub fn new(phases: [f64; 5]) -> Result<Self> {
        for i in 0..5 {
            for j in i + 1..5 {
                if phases[i] == phases[j] || !phases[i].is_finite() {
                    return Err(Error::Domain("signature phases must be distinct and finite".into()));
                }
            }
        }
        if (phases[1] + phases[2]).abs() > 1e-12 * phases[1].abs().max(1.0) {
            return Err(Error::Domain("m_F = ±2 signatures must be opposite".into()));
        }
        Ok(Self { phases })
    }

    pub fn phase(&self, class: SignatureClass) -> f64 {
        self.phases[class.id()]
    }

    /// Class whose phase is nearest to `reading`.
    pub fn resolve(&self, reading: f64) -> SignatureClass {
        SignatureClass::ALL
            .into_iter()
            .min_by(|a, b| {
                (self.phase(*a) - reading)
                    .abs()
                    .total_cmp(&(self.phase(*b) - reading).abs())
            })
            .expect("five classes")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlanStep {
    MeasureSignature,
    /// Two-level transfer swapping `from` and `to`.
    Selective { from: LevelLabel, to: LevelLabel },
}

impl PlanStep {
    fn sel(from: (u8, i8), to: (u8, i8)) -> Self {
        PlanStep::Selective {
            from: LevelLabel::new_unchecked(from.0, from.1),
            to: LevelLabel::new_unchecked(to.0, to.1),
        }
    }

    /// Label transition of a classical atom.
    pub fn act(&self, level: LevelLabel) -> LevelLabel {
        match *self {
            PlanStep::MeasureSignature => level,
            PlanStep::Selective { from, to } if level == from => to,
            PlanStep::Selective { from, to } if level == to => from,
            PlanStep::Selective { .. } => level,
        }
    }
}

impl fmt::Display for PlanStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlanStep::MeasureSignature => f.write_str("MEASIG"),
            PlanStep::Selective { from, to } => write!(f, "SEL {from} -> {to}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DisambiguationPlan {
    steps: Vec<PlanStep>,
}

impl DisambiguationPlan {
    pub fn new(steps: Vec<PlanStep>) -> Self {
        Self { steps }
    }

    pub fn steps(&self) -> &[PlanStep] {
        &self.steps
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn measurements(&self) -> usize {
        self.steps.iter().filter(|s| matches!(s, PlanStep::MeasureSignature)).count()
    }

    pub fn unitaries(&self) -> usize {
        self.steps.len() - self.measurements()
    }

    pub fn then(mut self, other: &DisambiguationPlan) -> Self {
        self.steps.extend_from_slice(&other.steps);
        self
    }

    /// Runs the plan on a classical atom starting at `start`.
    pub fn simulate(&self, start: LevelLabel) -> LevelLabel {
        self.steps.iter().fold(start, |level, step| step.act(level))
    }

    pub fn to_text(&self) -> String {
        self.steps.iter().map(|s| format!("{s}\n")).collect()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut steps = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| Error::Parse { line: i + 1, message };
            if line == "MEASIG" {
                steps.push(PlanStep::MeasureSignature);
            } else if let Some(rest) = line.strip_prefix("SEL ") {
                let (from, to) = rest
                    .split_once("->")
                    .ok_or_else(|| err("expected `SEL F,m -> F',m'`".into()))?;
                let from = from.parse().map_err(|e: Error| err(e.to_string()))?;
                let to = to.parse().map_err(|e: Error| err(e.to_string()))?;
                steps.push(PlanStep::Selective { from, to });
            } else {
                return Err(err(format!("unknown step {line:?}")));
            }
        }
        Ok(Self { steps })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Identified {
    /// The atom is in one of the two qubit levels; nothing was done to it.
    QubitSubspace,
    Leaked(LevelLabel),
}

#[derive(Debug, Clone)]
pub struct Classification {
    pub identified: Identified,
    /// Level the atom occupies after the plan ran.
    pub current: LevelLabel,
    pub plan: DisambiguationPlan,
    pub observations: Vec<SignatureClass>,
}

impl Classification {
    /// Steps taking the atom from where classification left it to `|0⟩`.
    /// Empty for the qubit subspace.
    pub fn recovery_plan(&self) -> DisambiguationPlan {
        match self.identified {
            Identified::QubitSubspace => DisambiguationPlan::default(),
            Identified::Leaked(_) => route_to_ground(self.current),
        }
    }
}

/// Selective transfers from `level` to `(1,0)`.
fn route_to_ground(level: LevelLabel) -> DisambiguationPlan {
    let steps = match (level.f, level.m) {
        (1, 0) => vec![],
        (2, 0) => vec![PlanStep::sel((2, 0), (1, 0))],
        (1, m) => vec![PlanStep::sel((1, m), (2, 0)), PlanStep::sel((2, 0), (1, 0))],
        (2, 1) | (2, -1) => vec![PlanStep::sel((2, level.m), (1, 0))],
        (_, m) => {
            let m1 = m.signum();
            vec![
                PlanStep::sel((2, m), (1, m1)),
                PlanStep::sel((1, m1), (2, 0)),
                PlanStep::sel((2, 0), (1, 0)),
            ]
        }
    };
    DisambiguationPlan::new(steps)
}

#[derive(Debug, Clone)]
pub struct ReturnPlan {
    pub plan: DisambiguationPlan,
    pub warning: Option<String>,
}

/// Plan rotating an atom sitting in the leaked level `identified` back to
/// `(1,0)`. Qubit levels yield an empty plan and a warning.
pub fn return_to_ground(identified: LevelLabel) -> ReturnPlan {
    if identified.is_qubit() {
        return ReturnPlan {
            plan: DisambiguationPlan::default(),
            warning: Some(format!("{identified} is a qubit level; nothing to return")),
        };
    }
    ReturnPlan {
        plan: route_to_ground(identified),
        warning: None,
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LeakageClassifier {
    table: SignatureTable,
}

impl LeakageClassifier {
    pub fn new(table: SignatureTable) -> Self {
        Self { table }
    }

    fn probe(&self, level: LevelLabel) -> SignatureClass {
        self.table.resolve(self.table.phase(signature_of(level)))
    }

    /// Identifies the level of an atom known to be in `hidden`.
    pub fn classify(&self, hidden: LevelLabel) -> Classification {
        let mut steps = vec![PlanStep::MeasureSignature];
        let first = self.probe(hidden);
        let mut observations = vec![first];
        let (identified, current) = match first {
            SignatureClass::Qubit => (Identified::QubitSubspace, hidden),
            SignatureClass::PlusTwo | SignatureClass::MinusTwo => (Identified::Leaked(hidden), hidden),
            pair => {
                let m = if pair == SignatureClass::PairPlus { 1 } else { -1 };
                let transfer = PlanStep::sel((1, m), (2, 0));
                let moved = transfer.act(hidden);
                steps.push(transfer);
                steps.push(PlanStep::MeasureSignature);
                let second = self.probe(moved);
                observations.push(second);
                let level = if second == SignatureClass::Qubit {
                    LevelLabel::new_unchecked(1, m)
                } else {
                    LevelLabel::new_unchecked(2, -m)
                };
                (Identified::Leaked(level), moved)
            }
        };
        Classification {
            identified,
            current,
            plan: DisambiguationPlan::new(steps),
            observations,
        }
    }

    /// Draws the atom's level from `populations` (indexed like
    /// [`LevelLabel::all`]) as the first probe would, then classifies it.
    pub fn classify_mixture<R: Rng + ?Sized>(
        &self,
        populations: &[f64; 8],
        rng: &mut R,
    ) -> Result<(LevelLabel, Classification)> {
        let total: f64 = populations.iter().sum();
        if populations.iter().any(|&p| p < 0.0) || (total - 1.0).abs() > 1e-12 {
            return Err(Error::Domain("level populations must be a distribution".into()));
        }
        let mut u = rng.random::<f64>();
        let levels = LevelLabel::all();
        let mut hidden = levels[7];
        for (level, &p) in levels.iter().zip(populations) {
            if u < p {
                hidden = *level;
                break;
            }
            u -= p;
        }
        Ok((hidden, self.classify(hidden)))
    }
}

pub fn classify(hidden: LevelLabel) -> Classification {
    LeakageClassifier::default().classify(hidden)
}

/// Index of `level` in [`LevelLabel::all`].
pub fn level_index(level: LevelLabel) -> usize {
    level.index()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lvl(f: u8, m: i8) -> LevelLabel {
        LevelLabel::new(f, m).unwrap()
    }

    #[test]
    fn labels() {
        assert_eq!(LevelLabel::all().len(), 8);
        assert!(LevelLabel::new(1, 2).is_err());
        assert!(LevelLabel::new(3, 0).is_err());
        for (i, l) in LevelLabel::all().iter().enumerate() {
            assert_eq!(level_index(*l), i);
            assert_eq!(l.to_string().parse::<LevelLabel>().unwrap(), *l);
        }
        assert_eq!(lvl(2, -1).to_string(), "2,-1");
        assert_eq!(lvl(1, 0).to_string(), "1,+0");
    }

    #[test]
    fn partition_into_five_classes() {
        let sizes: Vec<usize> = SignatureClass::ALL.iter().map(|c| c.members().len()).collect();
        assert_eq!(sizes, vec![2, 1, 1, 2, 2]);
        assert_eq!(signature_of(lvl(1, 1)), signature_of(lvl(2, -1)));
        assert_eq!(signature_of(lvl(1, -1)), signature_of(lvl(2, 1)));
        assert_eq!(signature_of(lvl(1, 0)), SignatureClass::Qubit);
        assert_eq!(signature_of(lvl(2, 0)), SignatureClass::Qubit);
        assert_eq!(SignatureClass::PlusTwo.members(), vec![lvl(2, 2)]);
    }

    #[test]
    fn classify_examples() {
        let c = classify(lvl(2, 2));
        assert_eq!(c.identified, Identified::Leaked(lvl(2, 2)));
        assert_eq!((c.plan.measurements(), c.plan.unitaries()), (1, 0));

        let c = classify(lvl(1, 1));
        assert_eq!(c.identified, Identified::Leaked(lvl(1, 1)));
        assert_eq!(c.plan.to_text(), "MEASIG\nSEL 1,+1 -> 2,+0\nMEASIG\n");
        assert_eq!(c.current, UPPER_QUBIT);
        assert_eq!(c.observations, vec![SignatureClass::PairPlus, SignatureClass::Qubit]);

        let c = classify(lvl(2, 0));
        assert_eq!(c.identified, Identified::QubitSubspace);
        assert_eq!(c.plan.unitaries(), 0);
    }

    #[test]
    fn return_plans() {
        let r = return_to_ground(lvl(2, -2));
        assert!(r.warning.is_none() && !r.plan.is_empty());
        assert_eq!(r.plan.simulate(lvl(2, -2)), GROUND);
        let r = return_to_ground(lvl(1, 0));
        assert!(r.warning.is_some() && r.plan.is_empty());
    }

    #[test]
    fn classify_then_recover_matches_return_plan() {
        for hidden in LevelLabel::all().into_iter().filter(|l| !l.is_qubit()) {
            let c = classify(hidden);
            let executed = c.plan.clone().then(&c.recovery_plan());
            assert_eq!(executed.simulate(hidden), GROUND, "{hidden}");
            let Identified::Leaked(id) = c.identified else { panic!() };
            assert_eq!(return_to_ground(id).plan.simulate(id), GROUND);
            // A transfer that moved the atom is the first step of its return plan.
            if c.current != hidden {
                let applied: Vec<_> = c.plan.steps().iter().filter(|s| **s != PlanStep::MeasureSignature).collect();
                assert_eq!(applied[0], &return_to_ground(id).plan.steps()[0]);
                assert_eq!(c.recovery_plan().steps(), &return_to_ground(id).plan.steps()[1..]);
            }
        }
    }

    #[test]
    fn plan_text_round_trip() {
        let plan = classify(lvl(1, -1)).plan.then(&return_to_ground(lvl(2, 2)).plan);
        assert_eq!(DisambiguationPlan::parse(&plan.to_text()).unwrap(), plan);
        assert!(DisambiguationPlan::parse("MEASIG\nSEL 1,+1 2,0").is_err());
        assert!(DisambiguationPlan::parse("SEL 3,0 -> 1,0").is_err());
    }

    #[test]
    fn custom_signature_table() {
        let t = SignatureTable::new([0.01, 0.7, -0.7, 0.3, -0.25]).unwrap();
        let cls = LeakageClassifier::new(t);
        for l in LevelLabel::all() {
            let c = cls.classify(l);
            let expect = if l.is_qubit() { Identified::QubitSubspace } else { Identified::Leaked(l) };
            assert_eq!(c.identified, expect);
        }
        assert!(SignatureTable::new([0.0, 1.0, -0.5, 0.3, -0.3]).is_err());
        assert!(SignatureTable::new([0.0, 1.0, -1.0, 1.0, -0.3]).is_err());
    }
}
