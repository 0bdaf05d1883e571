//! Synthetic temporal graphs and dataset statistics.
//!
//! Graphs are built in two steps: a Barabási–Albert aggregated graph fixes
//! which edges exist, then every edge receives a number of contacts drawn
//! from a uniform or Pareto distribution, with intervals placed uniformly
//! over the lifetime. All randomness comes from one `Xoshiro256PlusPlus`
//! stream seeded from `GenSpec::seed`, so output is reproducible.

use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, Pareto};
use rand_xoshiro::Xoshiro256PlusPlus;
use thiserror::Error;

use crate::corpus::{Contact, ContactKind, ContactSet};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ContactDist {
    /// Exactly `k` contacts per edge.
    Uniform(u32),
    /// `⌈X − 1⌉` contacts per edge with `X ~ Pareto(1, α)`, capped at ten times the mean of `X`.
    Pareto(f64),
}

impl ContactDist {
    /// Largest count this distribution can produce.
    pub fn max_count(self) -> u32 {
        match self {
            ContactDist::Uniform(k) => k,
            ContactDist::Pareto(alpha) => (10.0 * alpha / (alpha - 1.0)).ceil() as u32,
        }
    }
}

impl fmt::Display for ContactDist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ContactDist::Uniform(k) => write!(f, "uniform:{k}"),
            ContactDist::Pareto(a) => write!(f, "pareto:{a}"),
        }
    }
}

impl FromStr for ContactDist {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (name, arg) = s.split_once(':').ok_or_else(|| format!("expected uniform:K or pareto:ALPHA, got `{s}`"))?;
        match name {
            "uniform" => arg.parse().map(ContactDist::Uniform).map_err(|e| format!("bad count `{arg}`: {e}")),
            "pareto" => arg.parse().map(ContactDist::Pareto).map_err(|e| format!("bad alpha `{arg}`: {e}")),
            _ => Err(format!("unknown distribution `{name}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OverlapPolicy {
    /// Intervals on one edge are independent and may overlap.
    Allow,
    /// Intervals on one edge are pairwise disjoint and never touch.
    #[default]
    Forbid,
}

impl FromStr for OverlapPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "allow" => Ok(OverlapPolicy::Allow),
            "forbid" => Ok(OverlapPolicy::Forbid),
            _ => Err(format!("expected allow or forbid, got `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenSpec {
    pub vertices: u32,
    /// Edges attached per new vertex.
    pub m: u32,
    pub lifetime: u32,
    pub dist: ContactDist,
    pub overlap: OverlapPolicy,
    pub seed: u64,
}

#[derive(Debug, Error, PartialEq)]
pub enum SynthError {
    #[error("need more vertices ({vertices}) than edges per new vertex ({m})")]
    TooFewVertices { vertices: u32, m: u32 },
    #[error("edges per new vertex must be positive")]
    ZeroM,
    #[error("lifetime must be at least 2, got {0}")]
    ShortLifetime(u32),
    #[error("contacts per edge must be at least 1")]
    ZeroContacts,
    #[error("pareto shape must exceed 1, got {0}")]
    BadShape(f64),
    #[error("cannot place {k} disjoint intervals in a lifetime of {lifetime}")]
    NoRoom { k: u32, lifetime: u32 },
}

impl GenSpec {
    pub fn validate(&self) -> Result<(), SynthError> {
        if self.m == 0 {
            return Err(SynthError::ZeroM);
        }
        if self.vertices < self.m + 1 {
            return Err(SynthError::TooFewVertices { vertices: self.vertices, m: self.m });
        }
        if self.lifetime < 2 {
            return Err(SynthError::ShortLifetime(self.lifetime));
        }
        match self.dist {
            ContactDist::Uniform(0) => return Err(SynthError::ZeroContacts),
            ContactDist::Pareto(a) if !(a > 1.0 && a.is_finite()) => return Err(SynthError::BadShape(a)),
            _ => {}
        }
        let k = self.dist.max_count();
        if self.overlap == OverlapPolicy::Forbid && k > self.lifetime / 2 {
            return Err(SynthError::NoRoom { k, lifetime: self.lifetime });
        }
        Ok(())
    }

    /// Scaled-down analogue of a short-communication network: dense, about 1.2 contacts per edge.
    pub fn comm_net(seed: u64) -> Self {
        GenSpec {
            vertices: 100,
            m: 20,
            lifetime: 100,
            dist: ContactDist::Pareto(3.0),
            overlap: OverlapPolicy::Forbid,
            seed,
        }
    }

    /// Scaled-down analogue of a power-law graph with one contact per edge and a short lifetime.
    pub fn powerlaw(seed: u64) -> Self {
        GenSpec {
            vertices: 1000,
            m: 32,
            lifetime: 100,
            dist: ContactDist::Uniform(1),
            overlap: OverlapPolicy::Forbid,
            seed,
        }
    }

    /// Barabási–Albert graph with uniform contact counts and disjoint intervals.
    pub fn ba(vertices: u32, m: u32, per_edge: u32, lifetime: u32, seed: u64) -> Self {
        GenSpec { vertices, m, lifetime, dist: ContactDist::Uniform(per_edge), overlap: OverlapPolicy::Forbid, seed }
    }
}

fn rng_for(spec: &GenSpec) -> Xoshiro256PlusPlus {
    Xoshiro256PlusPlus::seed_from_u64(spec.seed)
}

/// Preferential-attachment edge set, each edge oriented from the newer to the older vertex.
///
/// Vertices `1..=m` form the seed; vertex `m + 1` links to all of them and
/// every later vertex links to `m` distinct earlier vertices chosen with
/// probability proportional to their degree.
pub fn gen_ba_aggregated(spec: &GenSpec) -> Result<Vec<(u32, u32)>, SynthError> {
    spec.validate()?;
    let mut rng = rng_for(spec);
    Ok(ba_edges(spec, &mut rng))
}

fn ba_edges(spec: &GenSpec, rng: &mut impl Rng) -> Vec<(u32, u32)> {
    let m = spec.m as usize;
    let mut edges = Vec::with_capacity(m * (spec.vertices as usize - m));
    // one entry per edge endpoint, so uniform picks are degree-proportional
    let mut ends: Vec<u32> = Vec::with_capacity(2 * edges.capacity());
    let mut chosen = Vec::with_capacity(m);
    for new in spec.m + 1..=spec.vertices {
        chosen.clear();
        if ends.is_empty() {
            chosen.extend(1..=spec.m);
        } else {
            while chosen.len() < m {
                let t = ends[rng.random_range(0..ends.len())];
                if !chosen.contains(&t) {
                    chosen.push(t);
                }
            }
        }
        for &t in &chosen {
            edges.push((new, t));
            ends.push(new);
            ends.push(t);
        }
    }
    edges.sort_unstable();
    edges
}

/// Draws contacts for every edge according to `spec`.
pub fn assign_contacts(edges: &[(u32, u32)], spec: &GenSpec) -> Result<ContactSet, SynthError> {
    spec.validate()?;
    let mut rng = rng_for(spec);
    // skip the stream consumed by the graph so the two steps stay independent
    rng.long_jump();
    Ok(place_contacts(edges, spec, &mut rng))
}

fn place_contacts(edges: &[(u32, u32)], spec: &GenSpec, rng: &mut impl Rng) -> ContactSet {
    let tau = spec.lifetime;
    let pareto = match spec.dist {
        ContactDist::Pareto(a) => Some(Pareto::new(1.0, a).expect("validated shape")),
        ContactDist::Uniform(_) => None,
    };
    let cap = spec.dist.max_count();
    let mut contacts = Vec::new();
    for &(u, v) in edges {
        let k = match (spec.dist, &pareto) {
            (ContactDist::Uniform(k), _) => k,
            (_, Some(p)) => ((p.sample(rng) - 1.0).ceil() as u32).clamp(1, cap),
            _ => unreachable!(),
        };
        match spec.overlap {
            OverlapPolicy::Allow => {
                for _ in 0..k {
                    let ts = rng.random_range(1..tau);
                    let te = rng.random_range(ts + 1..=tau);
                    contacts.push(Contact::new(u, v, ts, te));
                }
            }
            OverlapPolicy::Forbid => {
                let mut points: Vec<u32> =
                    index::sample(rng, tau as usize, 2 * k as usize).into_iter().map(|p| p as u32 + 1).collect();
                points.sort_unstable();
                contacts.extend(points.chunks(2).map(|p| Contact::new(u, v, p[0], p[1])));
            }
        }
    }
    ContactSet::new(contacts, ContactKind::Interval, Some(spec.vertices), Some(tau))
        .expect("generated contacts lie inside the universe")
}

/// Aggregated graph plus contacts in one call.
pub fn generate(spec: &GenSpec) -> Result<ContactSet, SynthError> {
    let edges = gen_ba_aggregated(spec)?;
    assign_contacts(&edges, spec)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetStats {
    pub vertices: u32,
    pub edges: usize,
    pub lifetime: u32,
    pub contacts: usize,
    pub contacts_per_vertex: f64,
    pub edges_per_vertex: f64,
    pub contacts_per_edge: f64,
    /// Contacts stored as 32-bit integers.
    pub size_u32_bits: u64,
    /// Contacts stored with the minimum fixed bit width per term.
    pub size_b_bits: u64,
}

fn ceil_log2(x: u32) -> u64 {
    if x <= 1 {
        0
    } else {
        u64::from(32 - (x - 1).leading_zeros())
    }
}

pub fn dataset_stats(cs: &ContactSet) -> DatasetStats {
    let mut edges: Vec<(u32, u32)> = cs.contacts().iter().map(Contact::edge).collect();
    edges.dedup();
    let n = cs.len();
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    let nv = cs.vertices() as usize;
    let time_terms = cs.arity() as u64 - 2;
    DatasetStats {
        vertices: cs.vertices(),
        edges: edges.len(),
        lifetime: cs.lifetime(),
        contacts: n,
        contacts_per_vertex: ratio(n, nv),
        edges_per_vertex: ratio(edges.len(), nv),
        contacts_per_edge: ratio(n, edges.len()),
        size_u32_bits: n as u64 * cs.arity() as u64 * 32,
        size_b_bits: n as u64 * (2 * ceil_log2(cs.vertices()) + time_terms * ceil_log2(cs.lifetime())),
    }
}

impl DatasetStats {
    /// `key<TAB>value` lines.
    pub fn to_report(&self) -> String {
        format!(
            "vertices\t{}\nedges\t{}\nlifetime\t{}\ncontacts\t{}\nc_per_v\t{:.2}\ne_per_v\t{:.2}\nc_per_e\t{:.2}\nsize_u32_bits\t{}\nsize_b_bits\t{}\n",
            self.vertices,
            self.edges,
            self.lifetime,
            self.contacts,
            self.contacts_per_vertex,
            self.edges_per_vertex,
            self.contacts_per_edge,
            self.size_u32_bits,
            self.size_b_bits
        )
    }

    /// Aligned header and row.
    pub fn to_table(&self) -> String {
        format!(
            "{:>10} {:>10} {:>10} {:>10} {:>8} {:>8} {:>8} {:>14} {:>14}\n{:>10} {:>10} {:>10} {:>10} {:>8.2} {:>8.2} {:>8.2} {:>14} {:>14}\n",
            "vertices",
            "edges",
            "lifetime",
            "contacts",
            "c/v",
            "e/v",
            "c/e",
            "size_u32_bits",
            "size_b_bits",
            self.vertices,
            self.edges,
            self.lifetime,
            self.contacts,
            self.contacts_per_vertex,
            self.edges_per_vertex,
            self.contacts_per_edge,
            self.size_u32_bits,
            self.size_b_bits
        )
    }
}
