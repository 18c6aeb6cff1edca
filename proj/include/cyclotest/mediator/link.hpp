// Copyright 2026 The Cyclotest Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <chrono>
#include <memory>
#include <string>
#include <utility>

#include "cyclotest/mediator/channel.hpp"
#include "cyclotest/mediator/protocol.hpp"
#include "cyclotest/mediator/sut_host.hpp"

namespace cyclotest::mediator {

// Test-system side of the mediator: one blocking exchange per cycle.
class Link {
 public:
  virtual ~Link() = default;
  // Must be called once before the first exchange.
  virtual void handshake(const Signature& expected) = 0;
  virtual CycleObservation exchange(const Valuation& inputs) = 0;
  virtual void shutdown() = 0;
};

class InProcessLink : public Link {
 public:
  explicit InProcessLink(std::unique_ptr<SutHost> host) : host_(std::move(host)) {}

  SutHost& host() { return *host_; }

  void handshake(const Signature& expected) override {
    if (expected != host_->signature()) {
      throw ProtocolError("signature mismatch: " + describe_mismatch(expected, host_->signature()));
    }
    signature_ = expected;
  }

  CycleObservation exchange(const Valuation& inputs) override {
    if (!signature_) throw ProtocolError("exchange before handshake");
    require_keys(inputs, signature_->inputs, "set_inputs");
    CycleObservation obs;
    try {
      obs = host_->run_cycle(inputs);
    } catch (const SubsystemPanic& e) {
      throw MediatorError(e.what());
    }
    if (obs.cycle != next_) {
      throw ProtocolError("observation for cycle " + std::to_string(obs.cycle) + " after set_inputs " +
                          std::to_string(next_));
    }
    ++next_;
    return obs;
  }

  void shutdown() override {}

 private:
  std::unique_ptr<SutHost> host_;
  std::optional<Signature> signature_;
  std::uint64_t next_ = 0;
};

// NDJSON over any line channel (TCP socket, child process pipes).
class StreamLink : public Link {
 public:
  explicit StreamLink(std::unique_ptr<LineChannel> channel,
                      std::chrono::milliseconds timeout = std::chrono::seconds(5))
      : channel_(std::move(channel)), timeout_(timeout) {}
  ~StreamLink() override { shutdown(); }

  void handshake(const Signature& expected) override {
    channel_->write_line(encode_hello(expected));
    Signature theirs = Message::parse(channel_->read_line(timeout_)).signature();
    if (theirs != expected) {
      throw ProtocolError("signature mismatch: " + describe_mismatch(expected, theirs));
    }
    signature_ = expected;
  }

  CycleObservation exchange(const Valuation& inputs) override {
    if (!signature_) throw ProtocolError("exchange before handshake");
    if (!channel_) throw DisconnectError("link already shut down");
    channel_->write_line(encode_set_inputs(next_, inputs));
    CycleObservation obs = Message::parse(channel_->read_line(timeout_)).observation();
    if (obs.cycle != next_) {
      throw ProtocolError("observation for cycle " + std::to_string(obs.cycle) + " after set_inputs " +
                          std::to_string(next_));
    }
    require_keys(obs.outputs, signature_->outputs, "observation outputs");
    require_keys(obs.state, signature_->state, "observation state");
    ++next_;
    return obs;
  }

  void shutdown() override {
    if (!channel_) return;
    try {
      channel_->write_line(encode_shutdown());
    } catch (const Error&) {
    }
    channel_->close();
    channel_.reset();
  }

 private:
  std::unique_ptr<LineChannel> channel_;
  std::chrono::milliseconds timeout_;
  std::optional<Signature> signature_;
  std::uint64_t next_ = 0;
};

}  // namespace cyclotest::mediator
