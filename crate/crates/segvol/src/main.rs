fn main() {
    let outcome = segvol::run(std::env::args_os());
    if outcome.code == 0 {
        print!("{}", outcome.report);
    } else {
        eprint!("{}", outcome.report);
    }
    if let Some(stats) = &outcome.stats {
        println!("{stats}");
    }
    std::process::exit(outcome.code);
}
