fn main() {
    std::process::exit(murmur2vec::cli::run(std::env::args_os()));
}
