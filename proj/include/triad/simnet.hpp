#pragma once

// Deterministic discrete-event runtime and an in-process transport that
// carries newline-framed JSON between endpoints with seeded delays and
// optional loss. Messages on one link are never reordered.

#include "triad/chronos.hpp"
#include "triad/codec.hpp"
#include "triad/sensing.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <queue>
#include <random>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace triad {

class EventQueue {
public:
    using Action = std::function<void()>;

    explicit EventQueue(Timestamp start = at_ms(0)) : now_(start) {}

    Timestamp now() const noexcept { return now_; }

    void schedule(Timestamp at, Action action) {
        queue_.push(Item{std::max(at, now_), next_++, std::move(action)});
    }

    /// Runs until the queue drains. Returns the number of actions executed.
    std::size_t run() {
        std::size_t n = 0;
        while (!queue_.empty()) {
            Item item = queue_.top();
            queue_.pop();
            now_ = item.at;
            item.action();
            ++n;
        }
        return n;
    }

    bool empty() const noexcept { return queue_.empty(); }

private:
    struct Item {
        Timestamp at;
        std::uint64_t order;
        Action action;
        bool operator>(const Item& o) const { return std::tie(at, order) > std::tie(o.at, o.order); }
    };

    Timestamp now_;
    std::uint64_t next_ = 0;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> queue_;
};

/// One-way link behaviour. Delay is base + uniform[0, jitter].
struct LinkModel {
    Duration base_delay{50};
    Duration jitter{0};
};

class SimTransport {
public:
    using Handler = std::function<void(const std::string& from, const std::string& line)>;
    /// Returns true to drop the message. Called with the decoded message.
    using DropRule = std::function<bool(const std::string& from, const std::string& to, const json& msg)>;

    SimTransport(EventQueue& queue, std::uint64_t seed) : queue_(queue), rng_(mix_seed(seed, 0x7e7e)) {}

    void attach(const std::string& endpoint, Handler handler) { handlers_[endpoint] = std::move(handler); }
    void detach(const std::string& endpoint) { handlers_.erase(endpoint); }

    void set_link(const std::string& from, const std::string& to, LinkModel model) { links_[{from, to}] = model; }
    void set_default_link(LinkModel model) { default_link_ = model; }
    void set_drop_rule(DropRule rule) { drop_ = std::move(rule); }

    /// Delay the next message on this link will get, drawn deterministically.
    Duration draw_delay(const std::string& from, const std::string& to) {
        const LinkModel m = link(from, to);
        const auto extra = m.jitter.count() > 0
                               ? std::uniform_int_distribution<std::int64_t>(0, m.jitter.count())(rng_)
                               : std::int64_t{0};
        return m.base_delay + Duration{extra};
    }

    void send(const std::string& from, const std::string& to, const json& msg) {
        ++sent_;
        if (drop_ && drop_(from, to, msg)) {
            ++dropped_;
            return;
        }
        std::string line = msg.dump();
        line.push_back('\n');
        Timestamp at = queue_.now() + draw_delay(from, to);
        Timestamp& last = last_delivery_[{from, to}];
        at = std::max(at, last);
        last = at;
        queue_.schedule(at, [this, from, to, line = std::move(line)] {
            auto it = handlers_.find(to);
            if (it == handlers_.end()) return;
            ++delivered_;
            it->second(from, line.substr(0, line.size() - 1));
        });
    }

    std::size_t sent() const noexcept { return sent_; }
    std::size_t delivered() const noexcept { return delivered_; }
    std::size_t dropped() const noexcept { return dropped_; }

private:
    LinkModel link(const std::string& from, const std::string& to) const {
        auto it = links_.find({from, to});
        return it == links_.end() ? default_link_ : it->second;
    }

    EventQueue& queue_;
    std::mt19937_64 rng_;
    std::map<std::string, Handler> handlers_;
    std::map<std::pair<std::string, std::string>, LinkModel> links_;
    std::map<std::pair<std::string, std::string>, Timestamp> last_delivery_;
    LinkModel default_link_;
    DropRule drop_;
    std::size_t sent_ = 0;
    std::size_t delivered_ = 0;
    std::size_t dropped_ = 0;
};

} // namespace triad
