// SPDX-License-Identifier: Apache-2.0

#include "egoqr/enhance.hpp"
#include "egoqr/error.hpp"

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <vector>

#include <fcntl.h>
#include <poll.h>
#include <spawn.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

extern char** environ;

namespace egoqr {

GrayImage SharpenUpscaler::upscale(const GrayImage& img) const
{
    const GrayImage up = resize(img, img.width() * 2, img.height() * 2);
    GrayImage out(up.width(), up.height());
    for (int y = 0; y < up.height(); ++y)
        for (int x = 0; x < up.width(); ++x) {
            int sum = 0;
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx)
                    sum += up.clamped(x + dx, y + dy);
            // up + (up - sum / 9), rounded half up with floor division
            int num = 2 * (18 * up(x, y) - sum) + 9;
            int v = num >= 0 ? num / 18 : -((-num + 17) / 18);
            out(x, y) = static_cast<std::uint8_t>(std::clamp(v, 0, 255));
        }
    return out;
}

ExternalResolver::ExternalResolver(std::string executable) : _executable(std::move(executable))
{
    if (_executable.empty())
        throw std::invalid_argument("external resolver path is empty");
}

namespace {

struct Fd
{
    int fd = -1;
    ~Fd() { reset(); }
    void reset()
    {
        if (fd >= 0)
            ::close(fd);
        fd = -1;
    }
};

std::string errno_text(const char* what)
{
    return std::string(what) + ": " + std::strerror(errno);
}

} // namespace

GrayImage ExternalResolver::upscale(const GrayImage& img) const
{
    // a socket pair for stdin lets us write with MSG_NOSIGNAL when the child exits early
    int in_pair[2], out_pipe[2];
    if (::socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, in_pair) != 0)
        throw Error(errno_text("socketpair"));
    Fd in_parent{in_pair[0]}, in_child{in_pair[1]};
    ::fcntl(in_parent.fd, F_SETFL, ::fcntl(in_parent.fd, F_GETFL) | O_NONBLOCK);
    if (::pipe2(out_pipe, O_CLOEXEC) != 0)
        throw Error(errno_text("pipe"));
    Fd out_parent{out_pipe[0]}, out_child{out_pipe[1]};

    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_adddup2(&actions, in_child.fd, STDIN_FILENO);
    posix_spawn_file_actions_adddup2(&actions, out_child.fd, STDOUT_FILENO);
    std::vector<char> arg0(_executable.begin(), _executable.end());
    arg0.push_back('\0');
    char* argv[] = {arg0.data(), nullptr};
    pid_t pid = 0;
    int rc = ::posix_spawnp(&pid, _executable.c_str(), &actions, nullptr, argv, environ);
    posix_spawn_file_actions_destroy(&actions);
    if (rc != 0)
        throw Error("cannot start resolver '" + _executable + "': " + std::strerror(rc));
    in_child.reset();
    out_child.reset();

    const auto request = save_pgm(img);
    std::vector<std::uint8_t> reply;
    std::size_t sent = 0;
    bool write_failed = false;
    if (request.empty())
        in_parent.reset();
    while (out_parent.fd >= 0) {
        pollfd fds[2] = {{out_parent.fd, POLLIN, 0}, {in_parent.fd, POLLOUT, 0}};
        int nfds = in_parent.fd >= 0 ? 2 : 1;
        if (::poll(fds, nfds, -1) < 0) {
            if (errno == EINTR)
                continue;
            break;
        }
        if (nfds == 2 && (fds[1].revents & (POLLOUT | POLLERR | POLLHUP))) {
            ssize_t n = ::send(in_parent.fd, request.data() + sent, request.size() - sent, MSG_NOSIGNAL);
            if (n > 0)
                sent += static_cast<std::size_t>(n);
            if (n < 0 && errno != EAGAIN && errno != EINTR)
                write_failed = true;
            if (write_failed || sent == request.size()) {
                ::shutdown(in_parent.fd, SHUT_WR);
                in_parent.reset();
            }
        }
        if (fds[0].revents & (POLLIN | POLLHUP | POLLERR)) {
            std::uint8_t buf[65536];
            ssize_t n = ::read(out_parent.fd, buf, sizeof buf);
            if (n > 0)
                reply.insert(reply.end(), buf, buf + n);
            else if (n == 0 || errno != EINTR)
                out_parent.reset();
        }
    }
    in_parent.reset();

    int status = 0;
    while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
    }
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0)
        throw Error("resolver '" + _executable + "' failed");
    if (write_failed)
        throw Error("resolver '" + _executable + "' did not read its input");

    GrayImage out = load_pgm(reply);
    if (out.width() != img.width() * scale_factor() || out.height() != img.height() * scale_factor())
        throw Error("resolver '" + _executable + "' returned " + std::to_string(out.width()) + "x" +
                    std::to_string(out.height()) + ", expected x2 of the input");
    return out;
}

std::shared_ptr<const SuperResolver> default_super_resolver()
{
    static const auto instance = std::make_shared<const SharpenUpscaler>();
    return instance;
}

} // namespace egoqr
