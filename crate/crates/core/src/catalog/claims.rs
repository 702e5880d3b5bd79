//! Registry of the quantitative claims the harness reproduces. Every entry
//! maps to a runnable experiment; the harness refuses to start if one is
//! missing.

/// Identifier and default parameters of one reproducible claim.
#[derive(Debug, Clone)]
pub struct ClaimInfo {
    pub id: &'static str,
    /// What is being checked, in terms of the artifact's own quantities.
    pub statement: &'static str,
    /// Default parameters (key, value) understood by the experiment.
    pub defaults: &'static [(&'static str, &'static str)],
}

pub fn claim_registry() -> Vec<ClaimInfo> {
    vec![
        ClaimInfo {
            id: "BMN-VAL",
            statement: "big match on N: value bracket at c_x contains (x+2)/(2x+2), width ≤ 0.02",
            defaults: &[("x_max", "10"), ("radius", "60"), ("width", "0.02")],
        },
        ClaimInfo {
            id: "BMZ-VAL",
            statement: "big match on Z proxy: corrected bracket at position 0 contains 1/2, width ≤ 0.05",
            defaults: &[("k_win", "10,20,40"), ("width", "0.05")],
        },
        ClaimInfo {
            id: "BMN-ATTAIN",
            statement: "scheduled mixing attains ≥ N/(2N+2) - 0.02 against the exact best response",
            defaults: &[("n_list", "1,3,5,10"), ("x_list", "0,1,2,5"), ("tol", "0.02")],
        },
        ClaimInfo {
            id: "TB-ATTAIN",
            statement: "turn-based (n+1)^2 walker attains ≥ N/(2N+2) - 0.02 against the exact best response",
            defaults: &[("n_list", "1,3,5,10"), ("x_list", "0,1,2"), ("tol", "0.02")],
        },
        ClaimInfo {
            id: "BMN-MR-DECAY",
            statement: "positional profiles are held below their analytic bound; attainment at x=20 ≤ 0.1",
            defaults: &[("x_list", "5,10,20"), ("cap_at_20", "0.1")],
        },
        ClaimInfo {
            id: "NOMR-AS",
            statement: "cycle strategy wins ≥ 0.99 within 20 entry cycles (Monte Carlo)",
            defaults: &[("episodes", "100000"), ("cycles", "20"), ("seed", "20240817")],
        },
        ClaimInfo {
            id: "NOMR-DECAY",
            statement: "each positional profile is held to ≤ 0.05 from u by entry selection",
            defaults: &[("eps", "0.05")],
        },
        ClaimInfo {
            id: "NOMARKOV",
            statement: "delay counter-strategy holds two Markov walkers to ≤ 0.1 from u",
            defaults: &[("eps", "0.1"), ("cycles_checked", "3")],
        },
        ClaimInfo {
            id: "NESTED-AS",
            statement: "recursive cycle strategy on the 2-nested game: reach estimate grows toward 1",
            defaults: &[("episodes", "2000"), ("seed", "907")],
        },
        ClaimInfo {
            id: "OPTMAX-23",
            statement: "refusal-tracking strategy attains 2/3 ± 0.005; finite-memory ladders are exploited below 2/3",
            defaults: &[("episodes", "400000"), ("seed", "4242"), ("tol", "0.005")],
        },
        ClaimInfo {
            id: "OPTMIN-12",
            statement: "index-matching answer holds 20 random openers to ≤ 1/2 + 1e-3; finite-memory answers are exploited above 1/2",
            defaults: &[("openers", "20"), ("seed", "1729")],
        },
        ClaimInfo {
            id: "ACYCLIC-MIN",
            statement: "slack-threshold MD choice stays within val(s0)(1+eps) on 50 random acyclic games",
            defaults: &[("games", "50"), ("states", "30"), ("eps_list", "0.5,0.1,0.01")],
        },
        ClaimInfo {
            id: "PLASTER-1BIT",
            statement: "plastered 1-bit strategy attains ≥ val - 0.25 from every inner-layer window state",
            defaults: &[("radius", "25"), ("eps", "0.25")],
        },
        ClaimInfo {
            id: "WSTRASS",
            statement: "product bound ∏(1-a) ≤ 1/(1+Σa) on 10^4 random sequences",
            defaults: &[("samples", "10000"), ("seed", "7")],
        },
        ClaimInfo {
            id: "PRODSUM",
            statement: "certificate-driven convergence classification on 10^4 random instances",
            defaults: &[("samples", "10000"), ("seed", "11")],
        },
        ClaimInfo {
            id: "TAILPROD",
            statement: "certified tail index keeps partial products ≥ 1-eps on 10^4 random instances",
            defaults: &[("samples", "10000"), ("seed", "13")],
        },
        ClaimInfo {
            id: "ORACLES",
            statement: "matrix solver vs grid, value iteration vs brute force, sweep vs Monte Carlo",
            defaults: &[("matrices", "200"), ("tiny_games", "40"), ("pairs", "20"), ("seed", "99")],
        },
    ]
}
