//! Interference graphs: random generators, degree structure, distances, and
//! edge-list I/O.
//!
//! Run with `cargo run --example sample_graphs`.

use spillover_lab::graph::{
    distance_to_nearest, path_count_matrix, read_edge_list, sample_beta_model, sample_latent_beta,
    sample_rdpg, write_edge_list, BetaModelParams, Distance, InterferenceGraph, RdpgParams,
};
use spillover_lab::seed::replicate_rng;
use spillover_lab::Result;

fn main() -> Result<()> {
    let rng = &mut replicate_rng(7, 0);

    // --- Random dot product graph -------------------------------------
    // Each unit carries a latent position α_i ~ Beta(1, 3); units i and j
    // are connected with probability ρ α_i α_j.
    let n = 300;
    let positions = sample_latent_beta(n, 1.0, 3.0, rng)?;
    let graph = sample_rdpg(&RdpgParams::new(positions.clone(), 1.0)?, rng);

    let degrees = graph.degrees();
    let mean_degree = degrees.iter().sum::<usize>() as f64 / n as f64;
    // E[degree] = (n−1) ρ E[α]² with E[α] = 1/4 under Beta(1, 3).
    let expected = (n - 1) as f64 * 0.25 * 0.25;
    println!("random dot product graph on {n} units");
    println!("  edges: {}", graph.edge_count());
    println!("  mean degree: {mean_degree:.2} (theory ≈ {expected:.2})");
    println!("  max degree:  {}", degrees.iter().max().unwrap());

    // --- β-model with superstars --------------------------------------
    // Edge probability logistic(w_i + w_j). Two units get weight 20
    // (superstars), the rest −2: superstars attach to nearly everyone
    // while ordinary pairs connect with probability logistic(−4) ≈ 0.018.
    let m = 200;
    let mut weights = vec![-2.0; m];
    weights[0] = 20.0;
    weights[1] = 20.0;
    let star_graph = sample_beta_model(&BetaModelParams::new(weights)?, rng);
    println!("\nβ-model graph on {m} units with 2 superstars");
    println!("  superstar degrees: {} and {}", star_graph.degree(0), star_graph.degree(1));
    let ordinary_mean = (2..m).map(|i| star_graph.degree(i)).sum::<usize>() as f64 / (m - 2) as f64;
    println!("  ordinary mean degree: {ordinary_mean:.2}");

    // --- Edge-list round trip -----------------------------------------
    let mut bytes = Vec::new();
    write_edge_list(&graph, &mut bytes)?;
    let restored = read_edge_list(bytes.as_slice())?;
    assert_eq!(restored.n(), graph.n());
    assert_eq!(restored.edges(), graph.edges());
    println!("\nedge-list round trip: {} bytes, graphs identical", bytes.len());

    // --- Paths and distances on a small fixed graph --------------------
    // A 6-cycle: the number of length-2 walks from a unit to itself is its
    // degree, and opposite units sit 3 hops apart.
    let cycle = InterferenceGraph::from_edges(
        6,
        &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (0, 5)],
    )?;
    let walks = path_count_matrix(&cycle, 2)?;
    println!("\n6-cycle: length-2 walks from unit 0 to itself: {}", walks[(0, 0)]);
    let distances = distance_to_nearest(&cycle, &[0, 3], &[3])?;
    for (source, d) in [0usize, 3].iter().zip(&distances) {
        match d {
            Distance::Finite(hops) => println!("  unit {source}: {hops} hops to nearest marked"),
            Distance::Infinite => println!("  unit {source}: unreachable"),
        }
    }
    Ok(())
}
