//! Deterministic MovieLens-format dataset for offline runs.
//!
//! Popularity follows a Zipf law over a random movie order; each
//! (gender, age) block carries its own log-normal genre taste that tilts
//! both which movies its users pick and how they rate them.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use platoon_cache_core::catalog::Genre;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Normal};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthSpec {
    pub users: u32,
    pub movies: u32,
    pub seed: u64,
    pub min_ratings: usize,
    pub mean_ratings: f64,
    pub zipf_exponent: f64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            users: 60,
            movies: 2400,
            seed: 7,
            min_ratings: 20,
            mean_ratings: 140.0,
            zipf_exponent: 0.9,
        }
    }
}

pub struct SynthFiles {
    pub users: String,
    pub movies: String,
    pub ratings: String,
}

const AGE_CODES: [(u32, f64); 7] = [(1, 0.04), (18, 0.18), (25, 0.35), (35, 0.2), (45, 0.09), (50, 0.08), (56, 0.06)];
const GENRE_WEIGHTS: [f64; 18] = [
    5.0, 3.0, 1.0, 2.5, 12.0, 2.0, 0.5, 15.0, 0.3, 0.5, 3.0, 1.0, 1.0, 4.5, 3.0, 4.5, 1.2, 0.6,
];

fn age_block(code: u32) -> usize {
    match code {
        1 => 0,
        18 => 1,
        25 => 2,
        35 => 3,
        45 | 50 => 4,
        _ => 5,
    }
}

fn pick_weighted<R: Rng>(rng: &mut R, weights: &[f64]) -> usize {
    let total: f64 = weights.iter().sum();
    let mut x = rng.random::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        if x < *w {
            return i;
        }
        x -= w;
    }
    weights.len() - 1
}

pub fn generate(spec: &SynthSpec) -> SynthFiles {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let ages: Vec<f64> = AGE_CODES.iter().map(|(_, w)| *w).collect();

    let mut users = String::new();
    let mut user_blocks = Vec::new();
    for id in 1..=spec.users {
        let male = rng.random::<f64>() < 0.72;
        let age = AGE_CODES[pick_weighted(&mut rng, &ages)].0;
        let occupation = rng.random_range(0..=20);
        let zip = rng.random_range(10000..99999);
        let _ = writeln!(users, "{id}::{}::{age}::{occupation}::{zip}", if male { "M" } else { "F" });
        user_blocks.push(usize::from(male) * 6 + age_block(age));
    }

    let taste_dist = LogNormal::new(0.0, 0.8).expect("valid log-normal");
    let taste: Vec<Vec<f64>> = (0..12).map(|_| (0..18).map(|_| taste_dist.sample(&mut rng)).collect()).collect();

    let mut movies = String::new();
    let mut movie_genres = Vec::new();
    for id in 1..=spec.movies {
        let n = 1 + usize::from(rng.random::<f64>() < 0.45) + usize::from(rng.random::<f64>() < 0.15);
        let mut gs: Vec<usize> = Vec::new();
        while gs.len() < n {
            let g = pick_weighted(&mut rng, &GENRE_WEIGHTS);
            if !gs.contains(&g) {
                gs.push(g);
            }
        }
        gs.sort_unstable();
        let year = rng.random_range(1930..=2000);
        let names: Vec<&str> = gs.iter().map(|&g| Genre::ALL[g].name()).collect();
        let _ = writeln!(movies, "{id}::Synthetic Feature {id:04} ({year})::{}", names.join("|"));
        movie_genres.push(gs);
    }

    let mut order: Vec<usize> = (0..spec.movies as usize).collect();
    order.shuffle(&mut rng);
    let mut popularity = vec![0.0; spec.movies as usize];
    for (rank, &m) in order.iter().enumerate() {
        popularity[m] = ((rank + 1) as f64).powf(-spec.zipf_exponent);
    }

    let count_dist = LogNormal::new((spec.mean_ratings - spec.min_ratings as f64).max(1.0).ln() - 0.32, 0.8)
        .expect("valid log-normal");
    let noise = Normal::new(0.0, 0.9).expect("valid normal");
    let mut ratings = String::new();
    let mut clock: i64 = 956_703_932;
    for (u, &block) in user_blocks.iter().enumerate() {
        let affinity: Vec<f64> = movie_genres
            .iter()
            .map(|gs| gs.iter().map(|&g| taste[block][g]).sum::<f64>() / gs.len() as f64)
            .collect();
        let mut weights: Vec<f64> = popularity.iter().zip(&affinity).map(|(p, a)| p * a).collect();
        let n = (spec.min_ratings + count_dist.sample(&mut rng) as usize).min(spec.movies as usize);
        let mut picks = Vec::with_capacity(n);
        for _ in 0..n {
            let m = pick_weighted(&mut rng, &weights);
            weights[m] = 0.0;
            picks.push(m);
        }
        for m in picks {
            let stars = (3.0 + affinity[m].ln() + noise.sample(&mut rng)).round().clamp(1.0, 5.0) as u8;
            clock += rng.random_range(1..600);
            let _ = writeln!(ratings, "{}::{}::{stars}::{clock}", u + 1, m + 1);
        }
    }
    SynthFiles { users, movies, ratings }
}

/// Writes `users.dat`, `movies.dat` and `ratings.dat` into `dir`.
pub fn write_dataset(dir: &Path, files: &SynthFiles) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("users.dat"), &files.users)?;
    fs::write(dir.join("movies.dat"), &files.movies)?;
    fs::write(dir.join("ratings.dat"), &files.ratings)
}
