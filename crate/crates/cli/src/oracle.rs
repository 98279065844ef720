//! Independent re-verification of emitted witnesses.

use std::sync::Arc;

use obslab_core::cochain::{coboundary, is_cocycle, Cochain};
use obslab_core::group::FiniteGroup;
use obslab_core::module::{AbelianModule, FlowData, FlowModule, GroupAction, ModuleAut};
use obslab_core::standard::StandardThree;

use crate::problem::cochain_from;
use crate::report::{CochainJson, FlowJson, Witness};
use crate::CliError;

fn rebuild(f: &FlowJson) -> Result<Arc<FlowModule>, CliError> {
    let g = Arc::new(FiniteGroup::from_table(&f.group.table, f.group.label.clone())?);
    let md = AbelianModule::new(f.module.moduli.clone())?;
    let theta = ModuleAut::new(&md, f.module.theta.clone())?;
    let auts = f
        .module
        .action
        .iter()
        .map(|m| ModuleAut::new(&md, m.clone()))
        .collect::<Result<Vec<_>, _>>()?;
    let action = GroupAction::new(&g, auts)?;
    Ok(Arc::new(FlowModule::new(FlowData::new(md, theta, f.module.torus_generator), action)?))
}

fn cochain(flow: &Arc<FlowModule>, c: &CochainJson) -> Result<Cochain, CliError> {
    cochain_from(flow, c.degree, &c.entries, "witness")
}

/// `Ok(None)` when the witness checks out, otherwise a description of the failure.
pub fn verify(w: &Witness) -> Result<Option<String>, CliError> {
    Ok(match w {
        Witness::Cocycle { flow, target } => {
            let f = rebuild(flow)?;
            (!is_cocycle(&cochain(&f, target)?)).then(|| "target is not a cocycle".to_string())
        }
        Witness::Coboundary { flow, target, primitive } => {
            let f = rebuild(flow)?;
            (coboundary(&cochain(&f, primitive)?) != cochain(&f, target)?)
                .then(|| "d primitive differs from target".to_string())
        }
        Witness::StandardCoboundary {
            flow,
            target_c,
            target_d1,
            primitive,
        } => {
            let f = rebuild(flow)?;
            let image = StandardThree::coboundary_of(&cochain(&f, primitive)?);
            (image.c != cochain(&f, target_c)? || image.d1 != cochain(&f, target_d1)?)
                .then(|| "standard coboundary of primitive differs from target".to_string())
        }
        Witness::ThetaCoboundary { flow, target, primitive } => {
            let f = rebuild(flow)?;
            let rest = cochain(&f, target)?.sub(&coboundary(&cochain(&f, primitive)?));
            rest.values()
                .iter()
                .any(|&v| !f.is_theta_coboundary(v))
                .then(|| "target minus d primitive leaves Im(theta - 1)".to_string())
        }
    })
}
