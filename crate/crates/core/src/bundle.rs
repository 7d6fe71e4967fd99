//! Text bundles: a directory holding `instance.json`, the rotation maps
//! `h.rot` (and `e.rot` for a sampler), and `manifest.json` with the spectral
//! reports, seeds and the vertex radix convention. Floats are written with
//! shortest round-trip formatting, so reloading is bit-exact.

use std::fs;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{MoveSet, RotationGraph};
use crate::instance::ModelInstance;
use crate::sampler::{PreparedBase, SamplerGraph, Strategy};
use crate::spectral::SpectralReport;

pub const BUNDLE_FORMAT: &str = "fiberwalk-bundle/1";
pub const RADIX_CONVENTION: &str =
    "vertex = e * n_H + c; e = h + n_S * (x_1 + m * (x_2 + ...)); point = m * z_c + s_h + x";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub format: String,
    pub strategy: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub moves: Option<Vec<Vec<i64>>>,
    pub n_s: usize,
    pub d: usize,
    pub n_h: usize,
    pub d_h: usize,
    pub h_report: SpectralReport,
    pub radix: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampler: Option<SamplerManifest>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerManifest {
    pub m: u64,
    pub seed: u64,
    pub lambda_target: f64,
    pub n_e: usize,
    pub e_report: SpectralReport,
    pub lambda_bound: f64,
    pub num_vertices: usize,
}

/// A reloaded bundle.
#[derive(Clone, Debug)]
pub enum Bundle {
    Base(Arc<PreparedBase>),
    Sampler(SamplerGraph),
}

impl Bundle {
    pub fn base(&self) -> &Arc<PreparedBase> {
        match self {
            Bundle::Base(b) => b,
            Bundle::Sampler(s) => s.base(),
        }
    }

    pub fn sampler(&self) -> Option<&SamplerGraph> {
        match self {
            Bundle::Base(_) => None,
            Bundle::Sampler(s) => Some(s),
        }
    }
}

pub fn manifest_for(base: &PreparedBase, sampler: Option<&SamplerGraph>) -> Manifest {
    let inst = base.instance();
    Manifest {
        format: BUNDLE_FORMAT.into(),
        strategy: base.strategy().name().into(),
        moves: base.strategy().moves().map(|m| m.moves().to_vec()),
        n_s: inst.offsets().len(),
        d: inst.dim(),
        n_h: base.n_h(),
        d_h: base.d_h(),
        h_report: *base.h_report(),
        radix: RADIX_CONVENTION.into(),
        sampler: sampler.map(|s| SamplerManifest {
            m: s.m(),
            seed: s.seed(),
            lambda_target: s.lambda_target(),
            n_e: s.n_e(),
            e_report: *s.e_report(),
            lambda_bound: s.lambda_bound(),
            num_vertices: s.num_vertices(),
        }),
    }
}

pub fn save_base(base: &PreparedBase, dir: impl AsRef<Path>) -> Result<()> {
    write_bundle(base, None, dir.as_ref())
}

pub fn save_sampler(sampler: &SamplerGraph, dir: impl AsRef<Path>) -> Result<()> {
    write_bundle(sampler.base(), Some(sampler), dir.as_ref())
}

fn write_bundle(base: &PreparedBase, sampler: Option<&SamplerGraph>, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    base.instance().save(dir.join("instance.json"))?;
    fs::write(dir.join("h.rot"), base.h().to_text())?;
    if let Some(s) = sampler {
        fs::write(dir.join("e.rot"), s.e().to_text())?;
    }
    let manifest = manifest_for(base, sampler);
    fs::write(
        dir.join("manifest.json"),
        serde_json::to_string_pretty(&manifest)? + "\n",
    )?;
    Ok(())
}

pub fn read_manifest(dir: impl AsRef<Path>) -> Result<Manifest> {
    let manifest: Manifest =
        serde_json::from_str(&fs::read_to_string(dir.as_ref().join("manifest.json"))?)?;
    if manifest.format != BUNDLE_FORMAT {
        return Err(Error::Parse(format!(
            "unsupported bundle format {:?}",
            manifest.format
        )));
    }
    Ok(manifest)
}

/// Reloads a bundle; the stored graphs are used as is, not rebuilt.
pub fn load(dir: impl AsRef<Path>) -> Result<Bundle> {
    let dir = dir.as_ref();
    let manifest = read_manifest(dir)?;
    let instance = ModelInstance::load(dir.join("instance.json"))?;
    let strategy = match (manifest.strategy.as_str(), manifest.moves) {
        ("complete", None) => Strategy::Complete,
        ("moves", Some(m)) => Strategy::Moves(MoveSet::new(m)?),
        ("moves_squared", Some(m)) => Strategy::MovesSquared(MoveSet::new(m)?),
        (s, _) => return Err(Error::Parse(format!("bad strategy {s:?} in manifest"))),
    };
    let h = RotationGraph::from_text(&fs::read_to_string(dir.join("h.rot"))?)?;
    if h.n() != manifest.n_h || h.k() != manifest.d_h {
        return Err(Error::Parse("h.rot disagrees with the manifest".into()));
    }
    let base = Arc::new(PreparedBase::from_parts(
        instance,
        strategy,
        h,
        manifest.h_report,
    )?);
    let Some(sm) = manifest.sampler else {
        return Ok(Bundle::Base(base));
    };
    let e = RotationGraph::from_text(&fs::read_to_string(dir.join("e.rot"))?)?;
    if e.n() != sm.n_e {
        return Err(Error::Parse("e.rot disagrees with the manifest".into()));
    }
    let s = SamplerGraph::assemble(base, sm.m, sm.seed, sm.lambda_target, e, sm.e_report)?;
    Ok(Bundle::Sampler(s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{rat, ratio, HalfspaceSystem, OffsetSet, PolytopeSpec, RationalPoint};
    use crate::sampler::{build_sampler, prepare_base};

    fn path_instance() -> ModelInstance {
        let sys =
            HalfspaceSystem::from_rows(1, vec![(vec![1], rat(1)), (vec![-1], rat(0))]).unwrap();
        let p = PolytopeSpec::new(sys, RationalPoint::new(vec![ratio(1, 2)])).unwrap();
        ModelInstance::new(None, OffsetSet::origin(1).unwrap(), p).unwrap()
    }

    #[test]
    fn sampler_roundtrip_is_exact() {
        let base = Arc::new(prepare_base(&path_instance(), Strategy::Complete).unwrap());
        let s = build_sampler(&base, 6, 11, Some(0.95)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        save_sampler(&s, dir.path()).unwrap();
        let back = load(dir.path()).unwrap();
        let r = back.sampler().unwrap();
        assert_eq!(r.graph(), s.graph());
        assert_eq!(r.e_report().lambda.to_bits(), s.e_report().lambda.to_bits());
        assert_eq!(r.base().lambda_h().to_bits(), s.base().lambda_h().to_bits());
        assert_eq!(r.lambda_target().to_bits(), s.lambda_target().to_bits());
        assert_eq!(
            read_manifest(dir.path()).unwrap(),
            manifest_for(s.base(), Some(&s))
        );
    }

    #[test]
    fn base_roundtrip() {
        let base = prepare_base(
            &path_instance(),
            Strategy::Moves(MoveSet::new(vec![vec![1]]).unwrap()),
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        save_base(&base, dir.path()).unwrap();
        let back = load(dir.path()).unwrap();
        assert!(back.sampler().is_none());
        assert_eq!(back.base().h(), base.h());
        assert_eq!(back.base().strategy(), base.strategy());
    }

    #[test]
    fn rejects_tampered_bundle() {
        let base = prepare_base(&path_instance(), Strategy::Complete).unwrap();
        let dir = tempfile::tempdir().unwrap();
        save_base(&base, dir.path()).unwrap();
        std::fs::write(dir.path().join("h.rot"), "2 1\n0 0 1 0\n1 0 0 0\n").unwrap();
        assert!(load(dir.path()).is_err());
    }
}
