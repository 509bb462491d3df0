use rand::Rng;

use super::Formula;

/// Parameters for [`random_formula`].
#[derive(Clone, Debug)]
pub struct FormulaShape {
    pub vars: Vec<String>,
    /// Maximum tree depth (a leaf has depth 0).
    pub max_depth: usize,
    /// Allow the constants `⊤` and `⊥` as leaves.
    pub constants: bool,
}

impl FormulaShape {
    pub fn new(vars: &[&str], max_depth: usize) -> Self {
        FormulaShape {
            vars: vars.iter().map(|s| s.to_string()).collect(),
            max_depth,
            constants: true,
        }
    }
}

/// Draws a formula over the core constructors with tree depth at most
/// `shape.max_depth`.
pub fn random_formula<R: Rng + ?Sized>(rng: &mut R, shape: &FormulaShape) -> Formula {
    gen(rng, shape, shape.max_depth)
}

fn leaf<R: Rng + ?Sized>(rng: &mut R, shape: &FormulaShape) -> Formula {
    let n_const = if shape.constants { 2 } else { 0 };
    let total = shape.vars.len() + n_const;
    if total == 0 {
        return Formula::True;
    }
    let k = rng.gen_range(0..total);
    if k < shape.vars.len() {
        Formula::Var(shape.vars[k].clone())
    } else if k == shape.vars.len() {
        Formula::True
    } else {
        Formula::False
    }
}

fn gen<R: Rng + ?Sized>(rng: &mut R, shape: &FormulaShape, depth: usize) -> Formula {
    if depth == 0 || rng.gen_bool(0.25) {
        return leaf(rng, shape);
    }
    match rng.gen_range(0..3) {
        0 => Formula::not(gen(rng, shape, depth - 1)),
        1 => Formula::and(gen(rng, shape, depth - 1), gen(rng, shape, depth - 1)),
        _ => Formula::diamond(gen(rng, shape, depth - 1)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn depth(f: &Formula) -> usize {
        match f {
            Formula::False | Formula::True | Formula::Var(_) => 0,
            Formula::Not(g) | Formula::Diamond(g) => 1 + depth(g),
            Formula::And(a, b) => 1 + depth(a).max(depth(b)),
        }
    }

    #[test]
    fn print_parse_round_trip_on_random_formulas() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let shape = FormulaShape::new(&["p", "q", "r1"], 8);
        for _ in 0..10_000 {
            let f = random_formula(&mut rng, &shape);
            assert!(depth(&f) <= 8);
            assert_eq!(parse(&f.to_string()).unwrap(), f);
            assert_eq!(parse(&f.to_string_full()).unwrap(), f);
        }
    }
}
