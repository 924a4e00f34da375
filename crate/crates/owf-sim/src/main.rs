use std::process::exit;

fn main() {
    // Die silently on a closed pipe (`owf-sim report | head`) instead of
    // panicking when a print hits EPIPE.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    exit(owf_sim::cli::run());
}
