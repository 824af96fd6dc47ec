fn main() {
    std::process::exit(bnlab::io::run(std::env::args_os()));
}
