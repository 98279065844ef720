//! Small named configurations used by the test suites, the CLI and the benches.

use std::sync::Arc;

use crate::characteristic::CharacteristicCocycle;
use crate::group::{FiniteGroup, NormalSubgroup};
use crate::module::{FlowData, FlowModule};

/// A group `H` with coefficients and the subgroups `M <= L`.
#[derive(Clone, Debug)]
pub struct Fixture {
    pub name: &'static str,
    pub flow: Arc<FlowModule>,
    pub l: NormalSubgroup,
    pub m: NormalSubgroup,
}

fn build(name: &'static str, h: FiniteGroup, l: &[usize]) -> Fixture {
    let h = Arc::new(h);
    let flow = Arc::new(FlowModule::trivial_action(FlowData::trivial_cyclic(2), &h).expect("Z/2 coefficients"));
    let l = NormalSubgroup::new(&h, l).expect("normal subgroup");
    let m = NormalSubgroup::trivial(&h);
    Fixture { name, flow, l, m }
}

/// `H = Z/4`, `L = {0, 2}`, `M = 1`, `A = Z/2`, trivial action and flow.
pub fn fx1() -> Fixture {
    build("fx1", FiniteGroup::cyclic(4), &[0, 2])
}

/// `H = Z/2 x Z/2`, `L` the first factor, `M = 1`, `A = Z/2`.
pub fn fx_klein() -> Fixture {
    build("fx-klein", FiniteGroup::product(&[FiniteGroup::cyclic(2), FiniteGroup::cyclic(2)]), &[0, 2])
}

/// Heisenberg group mod `k` with `L` its center, `M = 1`, `A = Z/2`.
pub fn heisenberg_center(k: usize) -> Fixture {
    let h = FiniteGroup::heisenberg(k);
    let center: Vec<usize> = (0..k).collect();
    build("heisenberg-center", h, &center)
}

/// The characteristic cocycle on `fx1` with `mu = 0` and `lamH(2; g) = g mod 2`.
pub fn fx1_chi(fx: &Fixture) -> CharacteristicCocycle {
    CharacteristicCocycle::from_fns(&fx.flow, &fx.l, |_, _| 0, |m, g| if m == 2 { g % 2 } else { 0 }, |_| 0)
        .expect("valid on fx1")
}
