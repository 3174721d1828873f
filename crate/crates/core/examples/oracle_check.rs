//! The brute-force semantics: reducts, least models and the answer-set test.

use dasc::oracle::{check_answer_set, cn, enumerate_answer_sets, generating_rules, reduct, Interpretation};
use dasc::program::parse_program;

fn main() -> anyhow::Result<()> {
    let program = parse_program("a :- not b. b :- not a. c :- a, not d.")?;
    let atom = |s: &str| program.atom_table().get(s).unwrap();

    for guess in [vec!["a", "c"], vec!["b"], vec!["a", "b"], vec!["a"]] {
        let x: Interpretation = guess.iter().map(|s| atom(s)).collect();
        let r = reduct(&program, &x);
        let least = cn(&r)?;
        let check = check_answer_set(&program, &x);
        println!("X = {}", x.display(&program));
        println!("  reduct:\n    {}", r.serialize().trim_end().replace('\n', "\n    "));
        println!("  Cn = {}", least.display(&program));
        println!("  generating rules: {:?}", generating_rules(&program, &x));
        match check.failure(&program, &x) {
            None => println!("  answer set"),
            Some(why) => println!("  rejected: {why}"),
        }
    }

    let all = enumerate_answer_sets(&program)?;
    let shown: Vec<String> = all.iter().map(|m| m.display(&program).to_string()).collect();
    println!("all answer sets: {}", shown.join(", "));
    Ok(())
}
