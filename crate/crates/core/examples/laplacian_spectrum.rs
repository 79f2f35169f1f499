//! Spectrum of Q = S - W for a network with two disconnected groups: the
//! zero eigenvalues count the groups and the eigengap picks k.

use tagspectra::ingest::{Corpus, TagCloud};
use tagspectra::similarity::{build_matrix, power_transform, DEFAULT_GAMMA};
use tagspectra::spectral::{build_q, count_zero_eigenvalues, eigendecompose, select_k, DEFAULT_ZERO_TOL};

pub fn run_example() -> tagspectra::Result<(usize, usize)> {
    let corpus = Corpus::from_clouds([
        TagCloud::from_counts("a1", [("alpha", 4), ("beta", 2)]),
        TagCloud::from_counts("a2", [("alpha", 3), ("gamma", 1)]),
        TagCloud::from_counts("a3", [("beta", 2), ("gamma", 2)]),
        TagCloud::from_counts("b1", [("delta", 5), ("eps", 1)]),
        TagCloud::from_counts("b2", [("delta", 2), ("zeta", 3)]),
        TagCloud::from_counts("b3", [("eps", 2), ("zeta", 1)]),
    ])?;
    let w = power_transform(&build_matrix(&corpus, &corpus.resources())?, DEFAULT_GAMMA)?;
    let q = build_q(&w);
    let spectrum = eigendecompose(&q)?;

    let shown: Vec<String> = spectrum.eigenvalues().iter().map(|l| format!("{l:.4}")).collect();
    println!("eigenvalues: {}", shown.join(" "));
    println!("Jacobi sweeps: {}", spectrum.sweeps());
    let zeros = count_zero_eigenvalues(&spectrum, DEFAULT_ZERO_TOL);
    let choice = select_k(&spectrum, 5, DEFAULT_ZERO_TOL)?;
    println!(
        "zero eigenvalues: {zeros}, eigengap k = {} (degenerate: {})",
        choice.k, choice.degenerate
    );
    Ok((zeros, choice.k))
}

#[allow(dead_code)]
fn main() -> tagspectra::Result<()> {
    run_example().map(|_| ())
}
