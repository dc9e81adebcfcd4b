#pragma once

#include <chrono>
#include <mutex>
#include <thread>
#include <vector>

namespace hinglish {

using Millis = std::chrono::milliseconds;

/// Time source for retry and cooldown logic. Timestamps are milliseconds
/// since an arbitrary epoch.
class Clock {
public:
    virtual ~Clock() = default;
    virtual Millis now() const = 0;
    virtual void sleep_for(Millis d) = 0;

    void sleep_until(Millis t) {
        auto current = now();
        if (t > current) sleep_for(t - current);
    }
};

class SystemClock final : public Clock {
public:
    Millis now() const override {
        return std::chrono::duration_cast<Millis>(std::chrono::steady_clock::now().time_since_epoch());
    }
    void sleep_for(Millis d) override {
        if (d.count() > 0) std::this_thread::sleep_for(d);
    }
};

/// Sleeping advances time instantly; every sleep is recorded.
class VirtualClock final : public Clock {
public:
    explicit VirtualClock(Millis start = Millis{0}) : now_(start) {}

    Millis now() const override {
        std::lock_guard lock(mu_);
        return now_;
    }

    void sleep_for(Millis d) override {
        std::lock_guard lock(mu_);
        if (d.count() < 0) d = Millis{0};
        sleeps_.push_back(d);
        now_ += d;
    }

    void advance(Millis d) {
        std::lock_guard lock(mu_);
        now_ += d;
    }

    std::vector<Millis> sleeps() const {
        std::lock_guard lock(mu_);
        return sleeps_;
    }

private:
    mutable std::mutex mu_;
    Millis now_;
    std::vector<Millis> sleeps_;
};

}  // namespace hinglish
