//! Run configuration: one struct drives both the flag parser and the config
//! file, so an invocation round-trips through serialization losslessly.

use clap::{Args, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    /// Canonical JSON: object keys sorted, exact rationals as "p/q" strings.
    Json,
    /// Flat sample table: one line per report row.
    Csv,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub workers: usize,
    pub format: OutputFormat,
    /// Write the report here instead of stdout.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
    /// Decimal places for approximate values (slopes, estimates).
    pub float_decimals: u8,
    /// Truncation depth cap for the number's enclosures.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth_cap: Option<u32>,
    /// Reporting tolerance override for estimates, strictly inside (0, 1).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    pub command: Command,
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.workers == 0 {
            return Err("workers must be positive".into());
        }
        if self.float_decimals == 0 || self.float_decimals > 17 {
            return Err("float-decimals must lie in [1, 17]".into());
        }
        if let Some(t) = self.tolerance {
            if !(t > 0.0 && t < 1.0) {
                return Err("tolerance must lie strictly inside (0, 1)".into());
            }
        }
        if self.depth_cap == Some(0) {
            return Err("depth-cap must be positive".into());
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "group", rename_all = "kebab-case")]
pub enum Command {
    /// Build a number from a recipe and report its certificate: declared
    /// gap ratio, predicted exponents with their basis, digit membership.
    Construct(ConstructArgs),
    /// Exhaustive box scans with certified comparisons.
    Scan {
        #[command(subcommand)]
        scan: ScanCmd,
    },
    /// Finite-scale exponent estimation (samples plus an extrapolated value).
    Estimate {
        #[command(subcommand)]
        estimate: EstimateCmd,
    },
    /// Structure verifications; any violation row makes the exit status 1.
    Verify {
        #[command(subcommand)]
        verify: VerifyCmd,
    },
    /// Exact formula evaluation on rational inputs.
    Formula {
        #[command(subcommand)]
        formula: FormulaCmd,
    },
    /// Evidence for the order-transfer conjecture on a (m, n) pair:
    /// estimates both exponents and checks the predicted bound.
    Conjecture(ConjectureArgs),
    /// Execute a run described by a config file.
    #[serde(skip)]
    Run(RunArgs),
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstructArgs {
    /// Number recipe, e.g. bugeaud:alpha=1,tau=3 or meinsatz:b=2,k=2,rho=1.
    #[arg(long)]
    pub number: String,
    /// Also check digit membership to this fractional depth.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub check_depth: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "kebab-case")]
pub enum ScanCmd {
    /// Minimum of |x₀ + ζx₁ + … + ζᵏx_k| over the coefficient box of each
    /// height; the dual of simultaneous approximation.
    Form(ScanFormArgs),
    /// Simultaneous approximation quality M_x = max_j ‖ζʲx‖ at given x.
    Point(ScanPointArgs),
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanFormArgs {
    #[arg(long)]
    pub number: String,
    #[arg(long)]
    pub k: u32,
    /// Ascending box heights, e.g. 50,100,200 (powers like 2^16 allowed).
    #[arg(long, value_delimiter = ',', required = true)]
    pub heights: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanPointArgs {
    #[arg(long)]
    pub number: String,
    #[arg(long)]
    pub k: u32,
    /// Denominators to evaluate, e.g. 16,4095 (powers like 2^16 allowed).
    #[arg(long, value_delimiter = ',', required = true)]
    pub x: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "kebab-case")]
pub enum EstimateCmd {
    /// Asymptotic order-k exponent: best of upper-half slopes and the
    /// record envelope over a structured candidate pool, per scale.
    Lambda(EstimateScalesArgs),
    /// Uniform order-k exponent: record-boundary envelope samples,
    /// aggregated by the stabilized late-window minimum.
    LambdaHat(EstimateScalesArgs),
    /// Dual exponent pair (asymptotic and uniform) from box minima.
    W(EstimateWArgs),
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimateScalesArgs {
    #[arg(long)]
    pub number: String,
    #[arg(long)]
    pub k: u32,
    /// Ascending scales, e.g. 2^16,2^32,2^64.
    #[arg(long, value_delimiter = ',', required = true)]
    pub scales: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimateWArgs {
    #[arg(long)]
    pub number: String,
    #[arg(long)]
    pub k: u32,
    /// Ascending box heights, e.g. 256,4094,65536.
    #[arg(long, value_delimiter = ',', required = true)]
    pub heights: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "kebab-case")]
pub enum VerifyCmd {
    /// Every x ≤ xmax with M_x < C₀/x splits through a power of a
    /// convergent denominator, with the exact scaling identity on records.
    Lemma2(VerifyLemma2Args),
    /// Every good rational approximation is a multiple of a defining
    /// vector of the expansion, above a small cutoff.
    Lemma3(VerifyLemma3Args),
    /// No two independent integer directions solve 0 < |ζm − n| < (2Q)⁻¹
    /// with |m| ≤ Q.
    Prop1(VerifyProp1Args),
    /// Search for x with M_x < C₀/x (order-k extremality witness).
    /// Evidence mode: absence of a witness is a finding, not a violation.
    Liouville(VerifyLiouvilleArgs),
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyLemma2Args {
    #[arg(long)]
    pub number: String,
    /// Defaults to the recipe's own order.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,
    #[arg(long)]
    pub xmax: u64,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyLemma3Args {
    #[arg(long)]
    pub number: String,
    /// Defaults to the recipe's own order.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,
    #[arg(long)]
    pub xmax: u64,
    /// Quality exponent t in ‖ζx‖ ≤ x^(−t); defaults to the expansion's
    /// natural exponent.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exponent: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyProp1Args {
    #[arg(long)]
    pub number: String,
    #[arg(long)]
    pub qmax: u64,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyLiouvilleArgs {
    #[arg(long)]
    pub number: String,
    #[arg(long)]
    pub k: u32,
    #[arg(long)]
    pub xmax: u64,
}

#[derive(Clone, Debug, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "kebab-case")]
pub enum FormulaCmd {
    /// λ_k = (λ₁ − k + 1)/k once λ_k > 1, and the uniform exponents
    /// collapse to 1/j.
    Spectrum(Lambda1KArgs),
    /// Cutoff k₀ = ⌈(λ₁+1)/2⌉ splitting exact values from brackets.
    Bestens(Lambda1KArgs),
    /// λ_m ≥ (nλ_n + n − m)/m; equality exactly when the bound exceeds 1.
    Transfer(TransferArgs),
    /// λ_{kn} ≥ (λ_n − k + 1)/k, same equality regime.
    LowerBound(LowerBoundArgs),
    /// λ̂_k ≤ max{1/k, 1/λ₁}.
    Theo(Lambda1KArgs),
    /// λ̂_k ≤ 1/⌈k/2⌉ for every transcendental real.
    Uniform(KOnlyArgs),
    /// Dimension of the set with a prescribed order-k exponent, where a
    /// closed form is known; errors outside the settled regimes.
    Hausdorff(HausdorffArgs),
    /// Uniform dual exponents from w₁: ŵ_j = j when w₁ ≥ k, and the
    /// bracket k ≤ ŵ_k ≤ min{w₁/(w₁−k+1), 2k−1} when k−1 < w₁ < k.
    Neuko(NeukoArgs),
    /// Two-sided primal/dual transfer inequalities on a (λ, w) pair,
    /// with the floor equivalences.
    Transference(TransferenceArgs),
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Lambda1KArgs {
    /// Order-1 exponent as p/q or "inf".
    #[arg(long)]
    pub lambda1: String,
    #[arg(long)]
    pub k: u32,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransferArgs {
    #[arg(long)]
    pub lambda_n: String,
    #[arg(long)]
    pub n: u32,
    #[arg(long)]
    pub m: u32,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LowerBoundArgs {
    #[arg(long)]
    pub lambda_n: String,
    #[arg(long)]
    pub n: u32,
    #[arg(long)]
    pub k: u32,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KOnlyArgs {
    #[arg(long)]
    pub k: u32,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HausdorffArgs {
    #[arg(long)]
    pub k: u32,
    /// Exponent value λ as p/q.
    #[arg(long)]
    pub lambda: String,
    /// Ask for the lower-bound regime instead of the exact one.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "is_false")]
    pub lower_bound: bool,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NeukoArgs {
    /// Dual order-1 exponent as p/q or "inf".
    #[arg(long)]
    pub w1: String,
    #[arg(long)]
    pub k: u32,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransferenceArgs {
    #[arg(long)]
    pub lambda: String,
    #[arg(long)]
    pub w: String,
    #[arg(long)]
    pub k: u32,
    /// Check the uniform-exponent inequalities instead of the asymptotic
    /// ones.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "is_false")]
    pub uniform: bool,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConjectureArgs {
    #[arg(long)]
    pub number: String,
    /// Higher order m of the pair (m, n); (4, 3) is the first pair the
    /// known bounds leave open.
    #[arg(long)]
    pub m: u32,
    #[arg(long)]
    pub n: u32,
    /// Ascending scales for both estimates.
    #[arg(long, value_delimiter = ',', required = true)]
    pub scales: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct RunArgs {
    /// TOML file holding a full run configuration.
    #[arg(long)]
    pub config: String,
}
