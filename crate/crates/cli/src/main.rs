fn main() {
    std::process::exit(pinnbench::run(std::env::args_os()));
}
