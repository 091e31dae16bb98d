#include "coevo/subprocess.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <chrono>
#include <cstring>

#include "coevo/errors.hpp"

namespace coevo {

namespace {

constexpr int kMaxChildren = 64;
std::atomic<pid_t> g_children[kMaxChildren];

void track(pid_t p) {
    for (auto& c : g_children) {
        pid_t z = 0;
        if (c.compare_exchange_strong(z, p)) return;
    }
}

void untrack(pid_t p) {
    for (auto& c : g_children) {
        pid_t q = p;
        if (c.compare_exchange_strong(q, 0)) return;
    }
}

void on_signal(int sig) {
    kill_children();
    signal(sig, SIG_DFL);
    raise(sig);
}

}  // namespace

void kill_children() {
    for (auto& c : g_children) {
        pid_t p = c.load();
        if (p > 0) kill(-p, SIGKILL);
    }
}

void install_child_cleanup() {
    signal(SIGINT, on_signal);
    signal(SIGTERM, on_signal);
    signal(SIGPIPE, SIG_IGN);
}

ProcessResult run_process(const std::string& command, const std::string& input, int timeout_ms) {
    int in_pipe[2], out_pipe[2], err_pipe[2];
    if (pipe(in_pipe) || pipe(out_pipe) || pipe(err_pipe)) throw Error("pipe failed: " + std::string(strerror(errno)));
    pid_t pid = fork();
    if (pid < 0) throw Error("fork failed: " + std::string(strerror(errno)));
    if (pid == 0) {
        setpgid(0, 0);
        dup2(in_pipe[0], 0);
        dup2(out_pipe[1], 1);
        dup2(err_pipe[1], 2);
        for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1], err_pipe[0], err_pipe[1]}) close(fd);
        execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
        _exit(127);
    }
    setpgid(pid, pid);
    track(pid);
    close(in_pipe[0]);
    close(out_pipe[1]);
    close(err_pipe[1]);
    signal(SIGPIPE, SIG_IGN);

    ProcessResult res;
    size_t written = 0;
    int wfd = in_pipe[1];
    if (input.empty()) {
        close(wfd);
        wfd = -1;
    } else {
        fcntl(wfd, F_SETFL, O_NONBLOCK);
    }
    int ofd = out_pipe[0], efd = err_pipe[0];
    auto start = std::chrono::steady_clock::now();
    char buf[65536];
    while (ofd >= 0 || efd >= 0) {
        pollfd fds[3];
        int n = 0;
        if (wfd >= 0) fds[n++] = {wfd, POLLOUT, 0};
        if (ofd >= 0) fds[n++] = {ofd, POLLIN, 0};
        if (efd >= 0) fds[n++] = {efd, POLLIN, 0};
        int wait = 100;
        if (timeout_ms > 0) {
            auto el = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start)
                          .count();
            if (el >= timeout_ms) {
                res.timed_out = true;
                kill(-pid, SIGKILL);
                break;
            }
            wait = static_cast<int>(std::min<long>(wait, timeout_ms - el));
        }
        int r = poll(fds, n, wait);
        if (r < 0 && errno != EINTR) break;
        for (int k = 0; k < n; ++k) {
            if (!fds[k].revents) continue;
            int fd = fds[k].fd;
            if (fd == wfd) {
                ssize_t w = write(wfd, input.data() + written, input.size() - written);
                if (w > 0) written += static_cast<size_t>(w);
                if (w < 0 && errno != EAGAIN) written = input.size();
                if (written >= input.size()) {
                    close(wfd);
                    wfd = -1;
                }
            } else {
                ssize_t got = read(fd, buf, sizeof buf);
                if (got > 0) {
                    (fd == ofd ? res.out : res.err).append(buf, static_cast<size_t>(got));
                } else if (got == 0 || errno != EAGAIN) {
                    close(fd);
                    (fd == ofd ? ofd : efd) = -1;
                }
            }
        }
    }
    for (int fd : {wfd, ofd, efd})
        if (fd >= 0) close(fd);
    int status = 0;
    waitpid(pid, &status, 0);
    untrack(pid);
    if (WIFEXITED(status)) res.exit_status = WEXITSTATUS(status);
    else res.exit_status = 128 + (WIFSIGNALED(status) ? WTERMSIG(status) : 0);
    return res;
}

}  // namespace coevo
