fn main() {
    if let Err(err) = shgn::harness::cli::run() {
        eprintln!("error: {err}");
        std::process::exit(1);
    }
}
