#pragma once

#include <chrono>

namespace ordirs::util {

/// Time source for recorded wall-clock metrics. Scripted/synthetic runs use
/// the fixed clock so that artifacts carrying timings stay byte-identical
/// across runs.
class Clock {
public:
    virtual ~Clock() = default;
    virtual double now_seconds() const = 0;
};

class SteadyClock final : public Clock {
public:
    double now_seconds() const override {
        return std::chrono::duration<double>(
                   std::chrono::steady_clock::now().time_since_epoch())
            .count();
    }
};

class FixedClock final : public Clock {
public:
    explicit FixedClock(double value = 0.0) : value_(value) {}
    double now_seconds() const override { return value_; }

private:
    double value_;
};

inline const Clock& steady_clock_instance() {
    static SteadyClock c;
    return c;
}

inline const Clock& fixed_clock_instance() {
    static FixedClock c;
    return c;
}

}  // namespace ordirs::util
