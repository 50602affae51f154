fn main() {
    k3walls::configure_threads();
    let code = k3walls::run(std::env::args_os(), &mut std::io::stdout(), &mut std::io::stderr());
    std::process::exit(code);
}
