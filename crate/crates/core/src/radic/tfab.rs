use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{code_freelike, greedy_gamma, Bounds, CertOptions, GammaElement, RadicError};
use crate::coder::{EngineN, Graph};
use crate::error::GuardError;
use crate::lattice::Lattice;
use crate::reductions::{freelike_normalize, FreeLikeOptions, Scalars};

#[derive(Debug, Clone, Copy)]
pub struct TfabOptions {
    pub depth: u32,
    pub bounds: Bounds,
    pub max_rank: usize,
}

impl Default for TfabOptions {
    fn default() -> Self {
        TfabOptions { depth: 64, bounds: Bounds { degree: 1, height: 1 }, max_rank: 4096 }
    }
}

/// The generator presentation of the torsion-free group coding a graph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TfabPresentation {
    pub rank: usize,
    pub depth: u32,
    pub r: u64,
    pub gammas: Vec<GammaElement>,
    /// Generator vectors mod 2^depth.
    pub generators: Vec<Vec<u128>>,
}

impl TfabPresentation {
    /// `rank R` / `depth M` / `r 2` / one `gamma i s…` line per tag / `generators K` / K lines
    /// of R residues.
    pub fn render(&self) -> String {
        let mut out = String::new();
        writeln!(out, "rank {}", self.rank).unwrap();
        writeln!(out, "depth {}", self.depth).unwrap();
        writeln!(out, "r {}", self.r).unwrap();
        for (i, g) in self.gammas.iter().enumerate() {
            let s: Vec<String> = g.s.iter().map(u32::to_string).collect();
            writeln!(out, "gamma {i} {}", s.join(" ")).unwrap();
        }
        writeln!(out, "generators {}", self.generators.len()).unwrap();
        for g in &self.generators {
            let s: Vec<String> = g.iter().map(u128::to_string).collect();
            writeln!(out, "{}", s.join(" ")).unwrap();
        }
        out
    }
}

/// Graph → tagged F₂-module → free-like tagged ℤ-module → G(M̄) at r = 2.
pub fn tfab_code(g: &Graph, opts: &TfabOptions) -> Result<TfabPresentation, RadicError> {
    let engine = EngineN::standard(g.n.max(2))?;
    let coded = engine.code_graph(g)?;
    let fl = freelike_normalize(&coded, &FreeLikeOptions { omega: 1, max_rank: opts.max_rank, scalars: Scalars::Integers })?;
    GuardError::check("tfab rank", fl.rank as u128, opts.max_rank as u128)?;
    let mut tags = vec![Lattice::full(0, fl.rank)];
    tags.extend(fl.tags.iter().cloned());
    let cert = CertOptions { r: 2, depth: opts.depth, bounds: opts.bounds, ..CertOptions::default() };
    let gammas = greedy_gamma(tags.len(), &cert)?;
    let rep = code_freelike(fl.rank, &tags, &gammas, &cert, 0)?;
    Ok(TfabPresentation { rank: fl.rank, depth: opts.depth, r: 2, generators: rep.numeric_generators()?, gammas })
}
