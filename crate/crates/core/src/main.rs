fn main() {
    std::process::exit(tweetclf::cli::main());
}
