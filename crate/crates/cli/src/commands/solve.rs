use std::path::PathBuf;

use blocklab_core::formats::{packing_row, parse_instance, PACKING_HEADER};
use blocklab_core::knapsack::{
    greedy_01, greedy_fractional, position_dependent_pack, solve_brute_force, solve_exact_with, subset_sum_pack_with,
    PackingResult, PositionWeight, DEFAULT_MAX_TABLE_CELLS,
};
use blocklab_core::KnapsackInstance;
use clap::ValueEnum;
use num_rational::Ratio;

use super::Context;
use crate::failure::Failure;

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Solver {
    /// Dynamic programming optimum.
    #[value(name = "exact")]
    Exact,
    /// Exhaustive search (at most 20 items).
    #[value(name = "brute")]
    Brute,
    /// Density greedy without the best-single-item comparison.
    #[value(name = "greedy01")]
    Greedy01,
    /// Density greedy with the best-single-item comparison.
    #[value(name = "greedy")]
    Greedy,
    /// Fractional relaxation.
    #[value(name = "fractional")]
    Fractional,
    /// Maximum fill, values ignored.
    #[value(name = "subsetsum")]
    SubsetSum,
    /// Position-weighted optimum; needs `--position-weights`.
    #[value(name = "position")]
    Position,
    /// exact, greedy, fractional and subsetsum.
    #[value(name = "all")]
    All,
}

impl Solver {
    fn name(self) -> &'static str {
        match self {
            Solver::Exact => "exact",
            Solver::Brute => "brute",
            Solver::Greedy01 => "greedy01",
            Solver::Greedy => "greedy",
            Solver::Fractional => "fractional",
            Solver::SubsetSum => "subsetsum",
            Solver::Position => "position",
            Solver::All => "all",
        }
    }
}

#[derive(clap::Args, Debug)]
pub struct Args {
    /// Instance file: `K=<capacity>` then `id,size,value` lines.
    file: PathBuf,
    /// Solver to run; repeat for several rows.
    #[arg(long = "solver", value_enum, required = true)]
    solvers: Vec<Solver>,
    /// Comma-separated position multipliers such as `1,1/2,1/3`.
    #[arg(long, value_name = "LIST")]
    position_weights: Option<String>,
    /// Bound on dynamic-programming table cells.
    #[arg(long, default_value_t = DEFAULT_MAX_TABLE_CELLS)]
    max_cells: u64,
}

fn parse_weights(list: &str) -> Result<PositionWeight, Failure> {
    let weights = list
        .split(',')
        .map(|w| {
            w.trim()
                .parse::<Ratio<u64>>()
                .map_err(|e| Failure::input(format!("bad position weight `{w}`: {e}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(PositionWeight::new(weights))
}

fn expand(solvers: &[Solver]) -> Vec<Solver> {
    let mut out = Vec::new();
    for &s in solvers {
        let group: &[Solver] = match s {
            Solver::All => &[Solver::Exact, Solver::Greedy, Solver::Fractional, Solver::SubsetSum],
            _ => std::slice::from_ref(&s),
        };
        out.extend_from_slice(group);
    }
    out
}

fn pack(
    solver: Solver,
    inst: &KnapsackInstance,
    weights: Option<&PositionWeight>,
    max_cells: u64,
) -> Result<PackingResult, Failure> {
    Ok(match solver {
        Solver::Exact => solve_exact_with(inst, max_cells)?,
        Solver::Brute => solve_brute_force(inst)?,
        Solver::Greedy01 => greedy_01(inst, false),
        Solver::Greedy => greedy_01(inst, true),
        Solver::Fractional => greedy_fractional(inst),
        Solver::SubsetSum => subset_sum_pack_with(inst, max_cells)?,
        Solver::Position => {
            let w = weights.ok_or_else(|| Failure::input("--solver position needs --position-weights"))?;
            position_dependent_pack(inst, w)?
        }
        Solver::All => unreachable!("expanded"),
    })
}

pub fn run(ctx: &Context, args: Args) -> Result<(), Failure> {
    let mut run = ctx.load(None)?;
    let text = run.read(&args.file)?;
    let inst = parse_instance(&text).map_err(|e| Failure::from(e).context(args.file.display()))?;
    let weights = args.position_weights.as_deref().map(parse_weights).transpose()?;
    let out = ctx.begin("solve", &run)?;

    let mut csv = format!("{PACKING_HEADER}\n");
    for solver in expand(&args.solvers) {
        let result = pack(solver, &inst, weights.as_ref(), args.max_cells)?;
        csv.push_str(&packing_row(solver.name(), &result));
        csv.push('\n');
    }
    out.primary("solve.csv", csv.as_bytes())
}
