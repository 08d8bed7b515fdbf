fn main() {
    std::process::exit(votewave::cli::run());
}
