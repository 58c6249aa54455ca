//! Reference walks on Z²: the vertex once-reinforced random walk and the
//! origin-excited random walk, with first-visit bookkeeping of the range.

use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::output::{write_atomic, write_json};
use crate::rng::RngStream;

pub type Site = (i64, i64);

/// East, north, west, south.
pub const NEIGHBORS: [Site; 4] = [(1, 0), (0, 1), (-1, 0), (0, -1)];

pub const DEFAULT_HALF_WIDTH: i64 = 1000;

/// How a first visit pushes the walker toward the origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Excitation {
    /// One unit along a coordinate chosen with probability proportional to
    /// its absolute value; zero coordinates are never chosen.
    ProportionalCoordinate,
    /// One unit along the coordinate of largest absolute value, ties going
    /// to the first coordinate.
    LargestCoordinate,
    /// One unit along every nonzero coordinate.
    BothCoordinates,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "walk", rename_all = "kebab-case", deny_unknown_fields)]
pub enum WalkRule {
    /// Neighbors are chosen with weight `a` if already visited and 1 otherwise.
    Orrw { a: f64 },
    /// Simple random walk steps, except that arriving at a new site triggers
    /// an immediate move toward the origin.
    Oerw { excitation: Excitation },
}

impl WalkRule {
    pub fn validate(&self) -> Result<()> {
        match self {
            WalkRule::Orrw { a } if !(*a > 0.0) || !a.is_finite() => Err(Error::invalid(
                "a",
                format!("reinforcement must be finite and positive, got {a}"),
            )),
            _ => Ok(()),
        }
    }

    /// Whether excitation moves can be diagonal.
    fn diagonal_moves(&self) -> bool {
        matches!(
            self,
            WalkRule::Oerw {
                excitation: Excitation::BothCoordinates
            }
        )
    }
}

/// Unit move toward the origin from `site` under `rule`. The proportional
/// rule draws from `rng`; the others are deterministic.
pub fn excitation_displacement(rule: Excitation, site: Site, rng: &mut RngStream) -> Site {
    let (x, y) = site;
    match rule {
        Excitation::BothCoordinates => (-x.signum(), -y.signum()),
        Excitation::LargestCoordinate => {
            if x == 0 && y == 0 {
                (0, 0)
            } else if x.abs() >= y.abs() {
                (-x.signum(), 0)
            } else {
                (0, -y.signum())
            }
        }
        Excitation::ProportionalCoordinate => {
            let total = x.abs() + y.abs();
            if total == 0 {
                (0, 0)
            } else if rng.uniform() * (total as f64) < x.abs() as f64 {
                (-x.signum(), 0)
            } else {
                (0, -y.signum())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeWalk {
    pub rule: WalkRule,
    pub position: Site,
    pub steps: u64,
    pub half_width: i64,
    /// Set when a move left the box; no further steps are taken.
    pub halted: bool,
    first_visit: HashMap<Site, u64>,
    order: Vec<Site>,
    pending_excitation: bool,
    /// Counts of nearest-neighbor moves by direction (see [`NEIGHBORS`]).
    pub direction_counts: [u64; 4],
    pub excitation_moves: u64,
}

impl LatticeWalk {
    pub fn new(rule: WalkRule, half_width: i64) -> Result<Self> {
        rule.validate()?;
        if half_width < 1 {
            return Err(Error::invalid("half_width", "must be at least 1"));
        }
        Ok(Self {
            rule,
            position: (0, 0),
            steps: 0,
            half_width,
            halted: false,
            first_visit: HashMap::from([((0, 0), 0)]),
            order: vec![(0, 0)],
            pending_excitation: false,
            direction_counts: [0; 4],
            excitation_moves: 0,
        })
    }

    pub fn is_visited(&self, site: Site) -> bool {
        self.first_visit.contains_key(&site)
    }

    pub fn first_visit(&self, site: Site) -> Option<u64> {
        self.first_visit.get(&site).copied()
    }

    pub fn range_size(&self) -> usize {
        self.order.len()
    }

    /// Visited sites in order of first visit.
    pub fn range(&self) -> &[Site] {
        &self.order
    }

    /// Probabilities of moving to each of [`NEIGHBORS`] on a nearest-neighbor step.
    pub fn transition_probabilities(&self) -> [f64; 4] {
        let (x, y) = self.position;
        let mut w = [1.0; 4];
        if let WalkRule::Orrw { a } = self.rule {
            for (k, (dx, dy)) in NEIGHBORS.iter().enumerate() {
                if self.is_visited((x + dx, y + dy)) {
                    w[k] = a;
                }
            }
        }
        let total: f64 = w.iter().sum();
        w.map(|v| v / total)
    }

    /// Takes one step; returns `false` once the walk has halted.
    pub fn step(&mut self, rng: &mut RngStream) -> bool {
        if self.halted {
            return false;
        }
        let (x, y) = self.position;
        let (dx, dy) = match (self.rule, self.pending_excitation) {
            (WalkRule::Oerw { excitation }, true) => {
                self.excitation_moves += 1;
                excitation_displacement(excitation, self.position, rng)
            }
            _ => {
                let k = match self.rule {
                    WalkRule::Orrw { a } if a != 1.0 => {
                        let p = self.transition_probabilities();
                        let u = rng.uniform();
                        let mut acc = 0.0;
                        let mut k = 3;
                        for (i, pi) in p.iter().enumerate() {
                            acc += pi;
                            if u < acc {
                                k = i;
                                break;
                            }
                        }
                        k
                    }
                    _ => rng.below(4),
                };
                self.direction_counts[k] += 1;
                NEIGHBORS[k]
            }
        };
        self.steps += 1;
        let next = (x + dx, y + dy);
        self.position = next;
        if next.0.abs() > self.half_width || next.1.abs() > self.half_width {
            self.halted = true;
            self.pending_excitation = false;
            return false;
        }
        let fresh = !self.first_visit.contains_key(&next);
        if fresh {
            self.first_visit.insert(next, self.steps);
            self.order.push(next);
        }
        self.pending_excitation = fresh && matches!(self.rule, WalkRule::Oerw { .. });
        true
    }

    /// Runs up to `steps` further steps, stopping early if the walk halts.
    pub fn run(&mut self, steps: u64, rng: &mut RngStream) {
        for _ in 0..steps {
            if !self.step(rng) {
                break;
            }
        }
    }

    /// Whether the range is connected, using 8-connectivity when excitation
    /// moves can be diagonal and 4-connectivity otherwise.
    pub fn is_connected(&self) -> bool {
        let moves: &[Site] = if self.rule.diagonal_moves() {
            &[
                (1, 0),
                (0, 1),
                (-1, 0),
                (0, -1),
                (1, 1),
                (1, -1),
                (-1, 1),
                (-1, -1),
            ]
        } else {
            &NEIGHBORS
        };
        let mut seen: HashMap<Site, ()> = HashMap::with_capacity(self.order.len());
        let mut queue = VecDeque::from([(0i64, 0i64)]);
        seen.insert((0, 0), ());
        while let Some((x, y)) = queue.pop_front() {
            for (dx, dy) in moves {
                let s = (x + dx, y + dy);
                if self.first_visit.contains_key(&s) && seen.insert(s, ()).is_none() {
                    queue.push_back(s);
                }
            }
        }
        seen.len() == self.order.len()
    }

    /// Width over height of the bounding box of the range.
    pub fn aspect_ratio(&self) -> f64 {
        let (mut x0, mut x1, mut y0, mut y1) = (0, 0, 0, 0);
        for &(x, y) in &self.order {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        (x1 - x0 + 1) as f64 / (y1 - y0 + 1) as f64
    }

    /// Rows `x,y,sqrt_first_visit_time` in order of first visit.
    pub fn export_range(&self) -> String {
        let mut s = String::from("x,y,sqrt_first_visit_time\n");
        for site in &self.order {
            let t = self.first_visit[site] as f64;
            let _ = writeln!(s, "{},{},{}", site.0, site.1, t.sqrt());
        }
        s
    }
}

/// Pearson chi-square test of direction counts against the uniform law on
/// four neighbors. Returns `(statistic, p_value)`.
pub fn direction_chi_square(counts: &[u64; 4]) -> (f64, f64) {
    let total: u64 = counts.iter().sum();
    let expected = total as f64 / 4.0;
    let stat: f64 = counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum();
    let p = match ChiSquared::new(3.0) {
        Ok(d) => 1.0 - d.cdf(stat),
        Err(_) => f64::NAN,
    };
    (stat, p)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeConfig {
    pub rule: WalkRule,
    pub steps: u64,
    #[serde(default = "default_half_width")]
    pub half_width: i64,
    pub seed: u64,
    /// Check range connectivity every this many steps (0 disables).
    #[serde(default)]
    pub check_every: u64,
}

fn default_half_width() -> i64 {
    DEFAULT_HALF_WIDTH
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeSummary {
    pub steps: u64,
    pub halted: bool,
    pub range_size: usize,
    pub aspect_ratio: f64,
    pub excitation_moves: u64,
    pub connectivity_checks: u64,
    pub connected: bool,
}

pub fn run_lattice(cfg: &LatticeConfig) -> Result<(LatticeWalk, LatticeSummary)> {
    let mut walk = LatticeWalk::new(cfg.rule, cfg.half_width)?;
    let mut rng = RngStream::new(cfg.seed).substream("lattice", 0);
    let mut checks = 0;
    let mut connected = true;
    let chunk = if cfg.check_every == 0 {
        cfg.steps
    } else {
        cfg.check_every
    };
    let mut done = 0;
    while done < cfg.steps && !walk.halted {
        let k = chunk.min(cfg.steps - done);
        walk.run(k, &mut rng);
        done += k;
        if cfg.check_every > 0 {
            checks += 1;
            connected &= walk.is_connected();
        }
    }
    if cfg.check_every == 0 {
        checks = 1;
        connected = walk.is_connected();
    }
    let summary = LatticeSummary {
        steps: walk.steps,
        halted: walk.halted,
        range_size: walk.range_size(),
        aspect_ratio: walk.aspect_ratio(),
        excitation_moves: walk.excitation_moves,
        connectivity_checks: checks,
        connected,
    };
    Ok((walk, summary))
}

/// Writes `lattice_range.csv` and `lattice_meta.json`.
pub fn write_lattice<M: Serialize>(
    dir: &Path,
    walk: &LatticeWalk,
    summary: &LatticeSummary,
    meta: &M,
) -> Result<()> {
    write_atomic(
        &dir.join("lattice_range.csv"),
        walk.export_range().as_bytes(),
    )?;
    write_json(
        &dir.join("lattice_meta.json"),
        &serde_json::json!({ "meta": meta, "summary": summary }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orrw_without_reinforcement_is_uniform() {
        let mut w = LatticeWalk::new(WalkRule::Orrw { a: 1.0 }, 100).unwrap();
        let mut rng = RngStream::new(3);
        for _ in 0..50 {
            assert_eq!(w.transition_probabilities(), [0.25; 4]);
            w.step(&mut rng);
        }
    }

    #[test]
    fn reinforced_weights() {
        let mut w = LatticeWalk::new(WalkRule::Orrw { a: 3.0 }, 100).unwrap();
        assert_eq!(w.transition_probabilities(), [0.25; 4]);
        w.first_visit.insert((1, 0), 1);
        w.order.push((1, 0));
        let p = w.transition_probabilities();
        assert!((p[0] - 0.5).abs() < 1e-15 && (p[1] - 1.0 / 6.0).abs() < 1e-15);
        assert!(LatticeWalk::new(WalkRule::Orrw { a: 0.0 }, 100).is_err());
    }

    #[test]
    fn excitation_examples() {
        let mut rng = RngStream::new(0);
        assert_eq!(
            excitation_displacement(Excitation::BothCoordinates, (3, -2), &mut rng),
            (-1, 1)
        );
        assert_eq!(
            excitation_displacement(Excitation::LargestCoordinate, (3, -2), &mut rng),
            (-1, 0)
        );
        assert_eq!(
            excitation_displacement(Excitation::LargestCoordinate, (2, -2), &mut rng),
            (-1, 0)
        );
        assert_eq!(
            excitation_displacement(Excitation::BothCoordinates, (0, 5), &mut rng),
            (0, -1)
        );
        for _ in 0..100 {
            assert_eq!(
                excitation_displacement(Excitation::ProportionalCoordinate, (0, -4), &mut rng),
                (0, 1)
            );
        }
        let hits = (0..40_000)
            .filter(|_| {
                excitation_displacement(Excitation::ProportionalCoordinate, (3, -1), &mut rng)
                    == (-1, 0)
            })
            .count();
        assert!((hits as f64 / 40_000.0 - 0.75).abs() < 0.01);
    }

    #[test]
    fn oerw_at_visited_origin_takes_srw_step() {
        let mut w = LatticeWalk::new(
            WalkRule::Oerw {
                excitation: Excitation::BothCoordinates,
            },
            10,
        )
        .unwrap();
        let mut rng = RngStream::new(1);
        w.step(&mut rng);
        assert_eq!(w.excitation_moves, 0);
        assert_eq!(w.position.0.abs() + w.position.1.abs(), 1);
        // the first step always reaches a new site, which returns the walker home
        w.step(&mut rng);
        assert_eq!(w.position, (0, 0));
        assert_eq!(w.excitation_moves, 1);
    }

    #[test]
    fn ranges_stay_connected_and_export_is_consistent() {
        for rule in [
            WalkRule::Orrw { a: 5.0 },
            WalkRule::Oerw {
                excitation: Excitation::ProportionalCoordinate,
            },
            WalkRule::Oerw {
                excitation: Excitation::LargestCoordinate,
            },
            WalkRule::Oerw {
                excitation: Excitation::BothCoordinates,
            },
        ] {
            let cfg = LatticeConfig {
                rule,
                steps: 20_000,
                half_width: 1000,
                seed: 9,
                check_every: 2_000,
            };
            let (w, s) = run_lattice(&cfg).unwrap();
            assert!(s.connected, "{rule:?}");
            let csv = w.export_range();
            assert_eq!(csv.lines().count(), w.range_size() + 1);
            assert_eq!(csv.lines().nth(1), Some("0,0,0"));
            assert_eq!(run_lattice(&cfg).unwrap().0.export_range(), csv);
        }
    }

    #[test]
    fn small_box_halts() {
        let cfg = LatticeConfig {
            rule: WalkRule::Orrw { a: 1.0 },
            steps: 1_000_000,
            half_width: 3,
            seed: 2,
            check_every: 0,
        };
        let (w, s) = run_lattice(&cfg).unwrap();
        assert!(s.halted && w.steps < 1_000_000);
        assert!(w.position.0.abs() == 4 || w.position.1.abs() == 4);
    }

    #[test]
    fn chi_square_of_exact_counts() {
        let (stat, p) = direction_chi_square(&[100, 100, 100, 100]);
        assert_eq!(stat, 0.0);
        assert!((p - 1.0).abs() < 1e-12);
        let (_, p) = direction_chi_square(&[200, 100, 100, 100]);
        assert!(p < 1e-6);
    }
}
