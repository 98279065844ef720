//! Problem files (TOML) and the objects they build.

use std::sync::Arc;

use obslab_core::characteristic::CharacteristicCocycle;
use obslab_core::cochain::Cochain;
use obslab_core::fixtures::{self, Fixture};
use obslab_core::group::{build_group, CrossSection, FiniteGroup, GroupSpec, NormalSubgroup};
use obslab_core::hjr::{descend_flow, ModularObstruction};
use obslab_core::module::{AbelianModule, FlowData, FlowModule, GroupAction, ModuleAut};
use obslab_core::standard::StandardThree;
use obslab_core::Budget;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// One nonzero value of a sparse cochain. Unlisted tuples are 0.
#[derive(Clone, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct Entry {
    pub at: Vec<usize>,
    pub value: usize,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Problem {
    pub seed: Option<u64>,
    pub fixture: Option<String>,
    pub budget: Option<BudgetSection>,
    pub group: Option<GroupSection>,
    pub module: Option<ModuleSection>,
    pub subgroups: Option<Subgroups>,
    pub section: Option<Sections>,
    pub cochain: Option<CochainSection>,
    pub chi: Option<ChiSection>,
    pub obstruction: Option<ObstructionSection>,
    pub heisenberg: Option<HeisenbergSection>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetSection {
    pub enumeration: Option<u64>,
    pub cells: Option<u64>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupSection {
    pub family: Option<String>,
    pub table: Option<Vec<Vec<usize>>>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModuleSection {
    pub spec: Option<String>,
    pub moduli: Option<Vec<u64>>,
    pub theta: Option<Vec<Vec<i64>>>,
    pub torus_generator: Option<usize>,
    /// Elements acting by `-1`.
    pub negated: Option<Vec<usize>>,
    /// One matrix per group element.
    pub action: Option<Vec<Vec<Vec<i64>>>>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Subgroups {
    pub l: Option<Vec<usize>>,
    pub m: Option<Vec<usize>>,
    pub n: Option<Vec<usize>>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sections {
    pub h: Option<Vec<usize>>,
    pub q: Option<Vec<usize>>,
    pub target: Option<Vec<usize>>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CochainSection {
    pub degree: usize,
    #[serde(default)]
    pub entries: Vec<Entry>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChiSection {
    #[serde(default)]
    pub mu: Vec<Entry>,
    #[serde(default)]
    pub lam_h: Vec<Entry>,
    #[serde(default)]
    pub lam_t: Vec<Entry>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObstructionSection {
    #[serde(default)]
    pub c: Vec<Entry>,
    #[serde(default)]
    pub d1: Vec<Entry>,
    pub nu: Vec<usize>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeisenbergSection {
    pub k: usize,
    pub nu: Option<String>,
}

/// Values given on the command line; they take precedence over the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub fixture: Option<String>,
    pub group: Option<String>,
    pub table: Option<String>,
    pub module: Option<String>,
    pub negated: Option<Vec<usize>>,
    pub l: Option<Vec<usize>>,
    pub m: Option<Vec<usize>>,
    pub target: Option<Vec<usize>>,
    pub k: Option<usize>,
    pub nu: Option<String>,
}

fn invalid(field: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Input(format!("field `{field}`: {msg}"))
}

pub fn parse_problem(text: &str) -> Result<Problem, CliError> {
    toml::from_str(text).map_err(|e| CliError::Input(format!("problem file: {e}")))
}

/// Parses `0 1; 1 0` or `0,1;1,0`, one row per `;` or newline.
pub fn parse_table(text: &str) -> Result<Vec<Vec<usize>>, CliError> {
    text.split([';', '\n'])
        .map(str::trim)
        .filter(|r| !r.is_empty())
        .enumerate()
        .map(|(i, row)| {
            row.split([',', ' ', '\t'])
                .filter(|x| !x.is_empty())
                .map(|x| x.parse::<usize>().map_err(|_| invalid("table", format!("row {i}: bad entry '{x}'"))))
                .collect()
        })
        .collect()
}

/// The assembled problem: everything resolved against the flags.
pub struct Context {
    pub problem: Problem,
    pub ov: Overrides,
    pub budget: Budget,
}

impl Context {
    pub fn new(problem: Problem, ov: Overrides) -> Self {
        let mut budget = Budget::from_env();
        if let Some(b) = &problem.budget {
            if let Some(e) = b.enumeration {
                budget.enumeration = e as u128;
            }
            if let Some(c) = b.cells {
                budget.cells = c as u128;
            }
        }
        Context { problem, ov, budget }
    }

    pub fn fixture(&self) -> Result<Option<Fixture>, CliError> {
        let name = self.ov.fixture.as_ref().or(self.problem.fixture.as_ref());
        Ok(match name.map(String::as_str) {
            None => None,
            Some("fx1") => Some(fixtures::fx1()),
            Some("klein") | Some("fx-klein") => Some(fixtures::fx_klein()),
            Some(other) => match other.strip_prefix("heisenberg:").and_then(|k| k.parse().ok()) {
                Some(k) if k >= 2 => Some(fixtures::heisenberg_center(k)),
                _ => return Err(invalid("fixture", format!("unknown fixture '{other}'"))),
            },
        })
    }

    pub fn group(&self) -> Result<Arc<FiniteGroup>, CliError> {
        if let Some(fx) = self.fixture()? {
            return Ok(fx.flow.group().clone());
        }
        if let Some(t) = &self.ov.table {
            let table = parse_table(t)?;
            return Ok(Arc::new(FiniteGroup::from_table(&table, format!("table[{}]", table.len()))?));
        }
        if let Some(f) = &self.ov.group {
            let spec = GroupSpec::parse(f).map_err(|e| invalid("group", e))?;
            return Ok(Arc::new(build_group(&spec)?));
        }
        let section = self.problem.group.as_ref().ok_or_else(|| invalid("group", "no group given"))?;
        match (&section.family, &section.table) {
            (Some(f), None) => {
                let spec = GroupSpec::parse(f).map_err(|e| invalid("group.family", e))?;
                Ok(Arc::new(build_group(&spec)?))
            }
            (None, Some(t)) => Ok(Arc::new(FiniteGroup::from_table(t, format!("table[{}]", t.len()))?)),
            _ => Err(invalid("group", "give exactly one of `family` and `table`")),
        }
    }

    pub fn flow(&self) -> Result<Arc<FlowModule>, CliError> {
        if let Some(fx) = self.fixture()? {
            return Ok(fx.flow);
        }
        let g = self.group()?;
        let empty = ModuleSection::default();
        let ms = self.problem.module.as_ref().unwrap_or(&empty);
        let module = if let Some(s) = &self.ov.module {
            AbelianModule::parse(s).map_err(|e| invalid("module", e))?
        } else {
            match (&ms.spec, &ms.moduli) {
                (Some(s), None) => AbelianModule::parse(s).map_err(|e| invalid("module.spec", e))?,
                (None, Some(m)) => AbelianModule::new(m.clone()).map_err(|e| invalid("module.moduli", e))?,
                (None, None) => return Err(invalid("module", "no module given")),
                _ => return Err(invalid("module", "give exactly one of `spec` and `moduli`")),
            }
        };
        let theta = match &ms.theta {
            Some(mat) => ModuleAut::new(&module, mat.clone()).map_err(|e| invalid("module.theta", e))?,
            None => ModuleAut::identity(&module),
        };
        let negated = self.ov.negated.as_ref().or(ms.negated.as_ref());
        let action = match (negated, &ms.action) {
            (Some(_), Some(_)) => return Err(invalid("module", "give at most one of `negated` and `action`")),
            (Some(neg), None) => GroupAction::by_sign(&g, &module, neg).map_err(|e| invalid("module.negated", e))?,
            (None, Some(mats)) => {
                let auts = mats
                    .iter()
                    .enumerate()
                    .map(|(i, m)| ModuleAut::new(&module, m.clone()).map_err(|e| invalid(&format!("module.action[{i}]"), e)))
                    .collect::<Result<Vec<_>, _>>()?;
                GroupAction::new(&g, auts).map_err(|e| invalid("module.action", e))?
            }
            (None, None) => GroupAction::trivial(&g, &module),
        };
        // Default torus: generated by element 1 when that is fixed by everything, else trivial.
        let fixed = module.size() > 1 && theta.apply(1) == 1 && g.elements().all(|x| action.aut(x).apply(1) == 1);
        let torus = ms.torus_generator.unwrap_or(if fixed { 1 } else { 0 });
        let flow = FlowModule::new(FlowData::new(module, theta, torus), action).map_err(|e| invalid("module", e))?;
        Ok(Arc::new(flow))
    }

    fn subgroup(&self, g: &Arc<FiniteGroup>, name: &str, given: Option<&Vec<usize>>) -> Result<Option<NormalSubgroup>, CliError> {
        let from_file = self.problem.subgroups.as_ref().and_then(|s| match name {
            "l" => s.l.as_ref(),
            "m" => s.m.as_ref(),
            _ => s.n.as_ref(),
        });
        match given.or(from_file) {
            Some(members) => Ok(Some(
                NormalSubgroup::new(g, members).map_err(|e| invalid(&format!("subgroups.{name}"), e))?,
            )),
            None => Ok(None),
        }
    }

    /// `(flow on H, L, M)`; M defaults to the trivial subgroup.
    pub fn tower_data(&self) -> Result<(Arc<FlowModule>, NormalSubgroup, NormalSubgroup), CliError> {
        let fx = self.fixture()?;
        let flow = self.flow()?;
        let h = flow.group().clone();
        let l = match (self.subgroup(&h, "l", self.ov.l.as_ref())?, &fx) {
            (Some(l), _) => l,
            (None, Some(fx)) => fx.l.clone(),
            (None, None) => return Err(invalid("subgroups.l", "no subgroup L given")),
        };
        let m = match (self.subgroup(&h, "m", self.ov.m.as_ref())?, &fx) {
            (Some(m), _) => m,
            (None, Some(fx)) => fx.m.clone(),
            (None, None) => NormalSubgroup::trivial(&h),
        };
        Ok((flow, l, m))
    }

    pub fn sections(&self) -> (Option<Vec<usize>>, Option<Vec<usize>>) {
        let s = self.problem.section.as_ref();
        (s.and_then(|s| s.h.clone()), s.and_then(|s| s.q.clone()))
    }

    pub fn target_section(&self) -> Option<Vec<usize>> {
        self.ov
            .target
            .clone()
            .or_else(|| self.problem.section.as_ref().and_then(|s| s.target.clone()))
    }

    /// The characteristic cocycle: `[chi]` if present, the canonical FX1 cocycle
    /// for that fixture, otherwise the trivial one.
    pub fn chi(&self, flow: &Arc<FlowModule>, l: &NormalSubgroup) -> Result<CharacteristicCocycle, CliError> {
        let Some(c) = &self.problem.chi else {
            if let Some(fx) = self.fixture()? {
                if fx.name == "fx1" {
                    return Ok(fixtures::fx1_chi(&fx));
                }
            }
            return Ok(CharacteristicCocycle::trivial(flow, l)?);
        };
        let table2 = |field: &str, entries: &[Entry]| -> Result<Vec<(usize, usize, usize)>, CliError> {
            entries
                .iter()
                .map(|e| match e.at.as_slice() {
                    [a, b] => Ok((*a, *b, e.value)),
                    _ => Err(invalid(field, format!("expected 2 indices, got {:?}", e.at))),
                })
                .collect()
        };
        let mu = table2("chi.mu", &c.mu)?;
        let lam_h = table2("chi.lam_h", &c.lam_h)?;
        let lam_t: Vec<(usize, usize)> = c
            .lam_t
            .iter()
            .map(|e| match e.at.as_slice() {
                [a] => Ok((*a, e.value)),
                _ => Err(invalid("chi.lam_t", format!("expected 1 index, got {:?}", e.at))),
            })
            .collect::<Result<_, _>>()?;
        for (field, pairs) in [("chi.mu", &mu), ("chi.lam_h", &lam_h)] {
            if let Some(&(a, _, _)) = pairs.iter().find(|p| !l.contains(p.0)) {
                return Err(invalid(field, format!("{a} is not in L")));
            }
        }
        let look2 = |t: &[(usize, usize, usize)], a: usize, b: usize| {
            t.iter().rev().find(|p| p.0 == a && p.1 == b).map_or(0, |p| p.2)
        };
        Ok(CharacteristicCocycle::from_fns(
            flow,
            l,
            |a, b| look2(&mu, a, b),
            |a, g| look2(&lam_h, a, g),
            |a| lam_t.iter().rev().find(|p| p.0 == a).map_or(0, |p| p.1),
        )?)
    }

    /// A cochain from `[cochain]` over `flow`.
    pub fn cochain(&self, flow: &Arc<FlowModule>) -> Result<Cochain, CliError> {
        let c = self.problem.cochain.as_ref().ok_or_else(|| invalid("cochain", "no cochain given"))?;
        cochain_from(flow, c.degree, &c.entries, "cochain.entries")
    }
}

pub fn cochain_from(flow: &Arc<FlowModule>, degree: usize, entries: &[Entry], field: &str) -> Result<Cochain, CliError> {
    let pairs: Vec<(Vec<usize>, usize)> = entries.iter().map(|e| (e.at.clone(), e.value)).collect();
    Cochain::from_entries(flow, degree, &pairs).map_err(|e| invalid(field, e))
}

/// `injective` (w = 1), `zero` (w = 0) or an explicit element index.
pub fn parse_nu(text: &str) -> Result<usize, CliError> {
    match text {
        "injective" => Ok(1),
        "zero" | "trivial" => Ok(0),
        other => other.parse().map_err(|_| invalid("nu", format!("expected injective, zero or an index, got '{other}'"))),
    }
}

/// An explicit obstruction over `G -> Q = G/N` from `[obstruction]`.
pub fn explicit_obstruction(ctx: &Context, o: &ObstructionSection) -> Result<ModularObstruction, CliError> {
    let flow = ctx.flow()?;
    let g = flow.group().clone();
    let n = ctx
        .subgroup(&g, "n", None)?
        .ok_or_else(|| invalid("subgroups.n", "an explicit obstruction needs N"))?;
    let qd = Arc::new(obslab_core::group::quotient(&g, &n)?);
    let section = match ctx.sections().1 {
        Some(t) => CrossSection::new(&qd, t).map_err(|e| invalid("section.q", e))?,
        None => CrossSection::minimal(&qd),
    };
    let flow_q = descend_flow(&flow, &section)?;
    let c = cochain_from(&flow_q, 3, &o.c, "obstruction.c")?;
    let d1 = cochain_from(&flow_q, 2, &o.d1, "obstruction.d1")?;
    let cocycle = StandardThree::new(c, d1).map_err(|e| invalid("obstruction", e))?;
    Ok(ModularObstruction::new(section, flow, cocycle, o.nu.clone())?)
}
