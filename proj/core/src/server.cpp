#include "trafwarden/server.hpp"

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <fstream>
#include <map>
#include <mutex>
#include <system_error>
#include <thread>
#include <variant>
#include <vector>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "trafwarden/wire.hpp"

namespace trafwarden {

namespace net = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = net::ip::tcp;

namespace {

struct Connected {};
struct Disconnected {};

struct Inbound {
  std::uint64_t client = 0;
  std::variant<Connected, Disconnected, wire::ClientMessage> event;
};

using Frame = std::shared_ptr<const std::string>;

Frame make_frame(const nlohmann::json& msg) { return std::make_shared<const std::string>(wire::frame(msg)); }

}  // namespace

struct SessionServer::Impl {
  class Connection;

  Impl(ScenarioConfig c, ServeOptions o)
      : cfg(std::move(c)), opts(std::move(o)), session(cfg, opts.mode), mode(opts.mode) {}

  ScenarioConfig cfg;
  ServeOptions opts;
  Session session;  // sim thread only, until stopped
  std::atomic<ControlMode> mode;

  net::io_context ioc;
  std::optional<tcp::acceptor> acceptor;
  unsigned short bound_port = 0;
  std::thread io_thread;
  std::thread sim_thread;
  std::atomic<bool> running{false};

  std::mutex inbound_mutex;
  std::vector<Inbound> inbound;

  std::mutex state_mutex;
  std::condition_variable stopped_cv;
  bool stopped = false;

  // io thread only
  std::map<std::uint64_t, std::shared_ptr<Connection>> clients;
  std::uint64_t next_client = 1;

  void push(Inbound in) {
    std::lock_guard lock(inbound_mutex);
    inbound.push_back(std::move(in));
  }

  void do_accept();
  void send_to(std::uint64_t client, Frame f);
  void broadcast(Frame f);
  void sim_loop();
  void handle(const Inbound& in);
  void finish();
};

class SessionServer::Impl::Connection : public std::enable_shared_from_this<Connection> {
 public:
  Connection(Impl& server, tcp::socket socket, std::uint64_t id)
      : server_(server), ws_(std::move(socket)), id_(id) {}

  void run() {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.text(true);
    ws_.async_accept([self = shared_from_this()](beast::error_code ec) { self->on_accept(ec); });
  }

  void send_control(Frame f) {
    control_.push_back(std::move(f));
    if (!writing_) write_next();
  }

  void send_state(Frame f) {
    latest_state_ = std::move(f);
    if (!writing_) write_next();
  }

  void close() {
    beast::error_code ignored;
    beast::get_lowest_layer(ws_).socket().shutdown(tcp::socket::shutdown_both, ignored);
    beast::get_lowest_layer(ws_).close();
  }

 private:
  void on_accept(beast::error_code ec) {
    if (ec) return;
    server_.clients[id_] = shared_from_this();
    server_.push({id_, Connected{}});
    send_control(make_frame(wire::hello(server_.cfg, server_.mode.load())));
    read();
  }

  void read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      self->on_read(ec);
    });
  }

  void on_read(beast::error_code ec) {
    if (ec) {
      drop();
      return;
    }
    const auto text = beast::buffers_to_string(buffer_.data());
    buffer_.consume(buffer_.size());
    std::string_view rest = text;
    while (!rest.empty()) {
      const auto nl = rest.find('\n');
      const auto line = rest.substr(0, nl);
      rest = nl == std::string_view::npos ? std::string_view{} : rest.substr(nl + 1);
      if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
      try {
        server_.push({id_, wire::parse_client_message(line)});
      } catch (const wire::WireError& e) {
        send_control(make_frame(wire::error(e.code(), e.what())));
      }
    }
    read();
  }

  void write_next() {
    Frame next;
    if (!control_.empty()) {
      next = std::move(control_.front());
      control_.pop_front();
    } else if (latest_state_) {
      next = std::move(latest_state_);
      latest_state_.reset();
    } else {
      writing_ = false;
      return;
    }
    writing_ = true;
    ws_.async_write(net::buffer(*next),
                    [self = shared_from_this(), next](beast::error_code ec, std::size_t) {
                      if (ec) {
                        self->drop();
                        return;
                      }
                      self->write_next();
                    });
  }

  void drop() {
    if (dropped_) return;
    dropped_ = true;
    writing_ = true;  // no further writes
    server_.clients.erase(id_);
    server_.push({id_, Disconnected{}});
  }

  Impl& server_;
  websocket::stream<beast::tcp_stream> ws_;
  std::uint64_t id_;
  beast::flat_buffer buffer_;
  std::deque<Frame> control_;
  Frame latest_state_;
  bool writing_ = false;
  bool dropped_ = false;
};

void SessionServer::Impl::do_accept() {
  acceptor->async_accept(net::make_strand(ioc), [this](beast::error_code ec, tcp::socket socket) {
    if (ec) {
      if (ec != net::error::operation_aborted) spdlog::warn("accept: {}", ec.message());
      if (!acceptor->is_open()) return;
    } else {
      std::make_shared<Connection>(*this, std::move(socket), next_client++)->run();
    }
    do_accept();
  });
}

void SessionServer::Impl::send_to(std::uint64_t client, Frame f) {
  net::post(ioc, [this, client, f = std::move(f)]() mutable {
    if (auto it = clients.find(client); it != clients.end()) it->second->send_control(std::move(f));
  });
}

void SessionServer::Impl::broadcast(Frame f) {
  net::post(ioc, [this, f = std::move(f)] {
    for (auto& [id, c] : clients) c->send_state(f);
  });
}

void SessionServer::Impl::handle(const Inbound& in) {
  std::visit(
      [&](const auto& ev) {
        using T = std::decay_t<decltype(ev)>;
        if constexpr (std::is_same_v<T, Connected>) {
          spdlog::info("client {} connected", in.client);
        } else if constexpr (std::is_same_v<T, Disconnected>) {
          spdlog::info("client {} disconnected", in.client);
          if (session.mode() == ControlMode::WizardOfOz) {
            session.submit(SignalCommand{.signal = TrafficSignal::AllStop,
                                         .issued_at = session.state().clock,
                                         .source = CommandSource::System});
          }
        } else {
          std::visit(
              [&](const auto& msg) {
                using M = std::decay_t<decltype(msg)>;
                if constexpr (std::is_same_v<M, wire::CommandMessage>) {
                  if (is_autonomous(session.mode())) {
                    send_to(in.client,
                            make_frame(wire::error(
                                "mode", fmt::format("operator commands are disabled in {} mode",
                                                    mode_name(session.mode())))));
                    return;
                  }
                  const auto v = session.submit_operator(msg.signal);
                  send_to(in.client, make_frame(wire::ack(msg.signal, v)));
                } else if constexpr (std::is_same_v<M, wire::SetModeMessage>) {
                  session.set_mode(msg.mode);
                  mode.store(msg.mode);
                } else {
                  send_to(in.client, make_frame(wire::metrics(session.metrics())));
                }
              },
              ev);
        }
      },
      in.event);
}

void SessionServer::Impl::sim_loop() {
  using clock = std::chrono::steady_clock;
  const auto frame_every =
      std::max<std::int64_t>(1, std::llround(1.0 / (opts.fps * cfg.dt)));
  const auto tick = std::chrono::duration_cast<clock::duration>(
      std::chrono::duration<double>(cfg.dt / opts.speed));
  auto next_tick = clock::now();

  broadcast(make_frame(wire::state(session.snapshot())));
  while (running.load()) {
    std::vector<Inbound> batch;
    {
      std::lock_guard lock(inbound_mutex);
      batch.swap(inbound);
    }
    for (const auto& in : batch) handle(in);

    session.advance();
    if (session.state().step_index % frame_every == 0) {
      broadcast(make_frame(wire::state(session.snapshot())));
    }
    if (opts.stop_at_end && session.finished()) break;

    next_tick += tick;
    const auto now = clock::now();
    if (next_tick < now) {
      next_tick = now;  // running behind: do not try to catch up in a burst
    } else {
      std::this_thread::sleep_until(next_tick);
    }
  }
  running.store(false);
  {
    std::lock_guard lock(state_mutex);
    stopped = true;
  }
  stopped_cv.notify_all();
}

void SessionServer::Impl::finish() {
  if (!opts.out_dir) return;
  std::filesystem::create_directories(*opts.out_dir);
  std::ofstream(*opts.out_dir / "trace.csv", std::ios::binary) << session.trace_text();
  std::ofstream(*opts.out_dir / "metrics.csv", std::ios::binary)
      << metrics_csv(session.metrics());
}

SessionServer::SessionServer(ScenarioConfig cfg, ServeOptions opts)
    : impl_(std::make_unique<Impl>(std::move(cfg), std::move(opts))) {}

SessionServer::~SessionServer() { stop(); }

void SessionServer::start() {
  auto& s = *impl_;
  try {
    const auto address = net::ip::make_address(s.opts.host);
    tcp::endpoint endpoint(address, s.opts.port);
    s.acceptor.emplace(s.ioc);
    s.acceptor->open(endpoint.protocol());
    s.acceptor->set_option(net::socket_base::reuse_address(true));
    s.acceptor->bind(endpoint);
    s.acceptor->listen(net::socket_base::max_listen_connections);
    s.bound_port = s.acceptor->local_endpoint().port();
  } catch (const boost::system::system_error& e) {
    s.acceptor.reset();
    throw std::system_error(e.code().value(), std::system_category(),
                            fmt::format("{}:{}: {}", s.opts.host, s.opts.port, e.what()));
  }

  s.running.store(true);
  s.do_accept();
  s.io_thread = std::thread([&s] { s.ioc.run(); });
  s.sim_thread = std::thread([&s] { s.sim_loop(); });
  spdlog::info("serving on ws://{}:{}/ ({} mode)", s.opts.host, s.bound_port,
               mode_name(s.opts.mode));
}

void SessionServer::stop() {
  if (!impl_) return;
  auto& s = *impl_;
  s.running.store(false);
  if (s.sim_thread.joinable()) s.sim_thread.join();
  if (s.io_thread.joinable()) {
    net::post(s.ioc, [&s] {
      beast::error_code ignored;
      if (s.acceptor) s.acceptor->close(ignored);
      for (auto& [id, c] : s.clients) c->close();
    });
    s.ioc.stop();
    s.io_thread.join();
    s.finish();
  }
}

void SessionServer::wait() {
  auto& s = *impl_;
  std::unique_lock lock(s.state_mutex);
  s.stopped_cv.wait(lock, [&s] { return s.stopped; });
}

unsigned short SessionServer::port() const { return impl_->bound_port; }

bool SessionServer::running() const { return impl_->running.load(); }

const Session& SessionServer::session() const { return impl_->session; }

}  // namespace trafwarden
