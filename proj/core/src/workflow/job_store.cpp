// Copyright 2026 The emflow Authors
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

#include "emflow/workflow/job_store.hpp"

#include <algorithm>
#include <random>

#include <sqlite3.h>

#include "emflow/types.hpp"

namespace emflow::workflow {
using nlohmann::json;

namespace {

constexpr const char* kSchema = R"sql(
CREATE TABLE IF NOT EXISTS jobs(
  seq INTEGER PRIMARY KEY AUTOINCREMENT,
  id TEXT UNIQUE NOT NULL,
  app TEXT NOT NULL,
  args TEXT NOT NULL,
  deps TEXT NOT NULL,
  state TEXT NOT NULL,
  attempts INTEGER NOT NULL,
  max_attempts INTEGER NOT NULL,
  worker_id TEXT,
  workdir TEXT NOT NULL,
  tags TEXT NOT NULL,
  timestamps TEXT NOT NULL,
  detail TEXT NOT NULL,
  claimed_at REAL);
CREATE INDEX IF NOT EXISTS jobs_by_state ON jobs(state, seq);
CREATE TABLE IF NOT EXISTS job_deps(job_id TEXT NOT NULL, dep_id TEXT NOT NULL);
CREATE INDEX IF NOT EXISTS job_deps_by_dep ON job_deps(dep_id);
CREATE TABLE IF NOT EXISTS transitions(
  seq INTEGER PRIMARY KEY AUTOINCREMENT,
  job_id TEXT NOT NULL,
  from_state TEXT,
  to_state TEXT NOT NULL,
  at TEXT NOT NULL,
  at_epoch REAL NOT NULL,
  worker_id TEXT NOT NULL,
  note TEXT NOT NULL);
CREATE INDEX IF NOT EXISTS transitions_by_job ON transitions(job_id, seq);
CREATE TABLE IF NOT EXISTS apps(
  name TEXT PRIMARY KEY,
  granularity TEXT NOT NULL,
  avg_runtime REAL,
  runs INTEGER NOT NULL DEFAULT 0);
CREATE TABLE IF NOT EXISTS job_output(job_id TEXT PRIMARY KEY, text TEXT NOT NULL);
CREATE TABLE IF NOT EXISTS datasets(name TEXT PRIMARY KEY, root TEXT NOT NULL, info TEXT NOT NULL, created_at TEXT NOT NULL);
CREATE TABLE IF NOT EXISTS sweeps(id TEXT PRIMARY KEY, report TEXT NOT NULL, created_at TEXT NOT NULL);
CREATE TABLE IF NOT EXISTS reviews(
  dataset TEXT NOT NULL, section INTEGER NOT NULL, verdict TEXT NOT NULL, job_id TEXT NOT NULL, at TEXT NOT NULL,
  PRIMARY KEY(dataset, section));
CREATE TABLE IF NOT EXISTS meta(key TEXT PRIMARY KEY, value TEXT NOT NULL);
)sql";

void check(sqlite3* db, int rc, const char* what) {
  if (rc != SQLITE_OK && rc != SQLITE_DONE && rc != SQLITE_ROW) {
    throw Error(std::string("job store: ") + what + ": " + sqlite3_errmsg(db));
  }
}

class Stmt {
 public:
  Stmt(sqlite3* db, const char* sql) : db_(db) { check(db, sqlite3_prepare_v2(db, sql, -1, &stmt_, nullptr), sql); }
  ~Stmt() { sqlite3_finalize(stmt_); }
  Stmt(const Stmt&) = delete;
  Stmt& operator=(const Stmt&) = delete;

  Stmt& bind(int i, const std::string& v) {
    check(db_, sqlite3_bind_text(stmt_, i, v.data(), static_cast<int>(v.size()), SQLITE_TRANSIENT), "bind");
    return *this;
  }
  Stmt& bind(int i, const char* v) { return bind(i, std::string(v)); }
  Stmt& bind(int i, std::int64_t v) {
    check(db_, sqlite3_bind_int64(stmt_, i, v), "bind");
    return *this;
  }
  Stmt& bind(int i, int v) { return bind(i, static_cast<std::int64_t>(v)); }
  Stmt& bind(int i, double v) {
    check(db_, sqlite3_bind_double(stmt_, i, v), "bind");
    return *this;
  }
  Stmt& bind_null(int i) {
    check(db_, sqlite3_bind_null(stmt_, i), "bind");
    return *this;
  }
  Stmt& bind(int i, const std::optional<std::string>& v) { return v ? bind(i, *v) : bind_null(i); }

  bool step() {
    const int rc = sqlite3_step(stmt_);
    check(db_, rc, sqlite3_sql(stmt_));
    return rc == SQLITE_ROW;
  }
  void run() {
    while (step()) {
    }
  }

  bool is_null(int c) const { return sqlite3_column_type(stmt_, c) == SQLITE_NULL; }
  std::string text(int c) const {
    const auto* p = sqlite3_column_text(stmt_, c);
    return p ? std::string(reinterpret_cast<const char*>(p), static_cast<std::size_t>(sqlite3_column_bytes(stmt_, c)))
             : std::string();
  }
  std::int64_t i64(int c) const { return sqlite3_column_int64(stmt_, c); }
  double real(int c) const { return sqlite3_column_double(stmt_, c); }

 private:
  sqlite3* db_;
  sqlite3_stmt* stmt_ = nullptr;
};

void exec(sqlite3* db, const char* sql) { check(db, sqlite3_exec(db, sql, nullptr, nullptr, nullptr), sql); }

std::string new_job_id() {
  thread_local std::mt19937_64 rng{std::random_device{}() ^
                                   static_cast<std::uint64_t>(epoch_now() * 1e6)};
  static constexpr char kHex[] = "0123456789abcdef";
  std::string id = "j";
  auto v = rng();
  for (int i = 0; i < 12; ++i, v >>= 4) id += kHex[v & 0xf];
  return id;
}

constexpr const char* kJobColumns =
    "seq, id, app, args, deps, state, attempts, max_attempts, worker_id, workdir, tags, timestamps, detail";

JobRecord read_job(const Stmt& s) {
  JobRecord r;
  r.seq = s.i64(0);
  r.id = s.text(1);
  r.app = s.text(2);
  r.args = json::parse(s.text(3));
  r.deps = json::parse(s.text(4)).get<std::vector<std::string>>();
  r.state = parse_state(s.text(5));
  r.attempts = static_cast<int>(s.i64(6));
  r.max_attempts = static_cast<int>(s.i64(7));
  if (!s.is_null(8)) r.worker_id = s.text(8);
  r.workdir = s.text(9);
  r.tags = json::parse(s.text(10)).get<std::map<std::string, std::string>>();
  r.timestamps = json::parse(s.text(11)).get<std::map<std::string, std::string>>();
  r.detail = s.text(12);
  return r;
}

}  // namespace

void to_json(json& j, const DatasetRecord& d) {
  j = {{"name", d.name}, {"root", d.root.string()}, {"info", d.info}, {"created_at", d.created_at}};
}

class JobStore::Txn {
 public:
  explicit Txn(JobStore& s) : db_(s.db_) { exec(db_, "BEGIN IMMEDIATE"); }
  ~Txn() {
    if (!done_) sqlite3_exec(db_, "ROLLBACK", nullptr, nullptr, nullptr);
  }
  void commit() {
    exec(db_, "COMMIT");
    done_ = true;
  }

 private:
  sqlite3* db_;
  bool done_ = false;
};

JobStore::JobStore(const std::filesystem::path& path) : path_(path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const int rc = sqlite3_open_v2(path.c_str(), &db_, SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE | SQLITE_OPEN_NOMUTEX,
                                 nullptr);
  if (rc != SQLITE_OK) {
    const std::string msg = db_ ? sqlite3_errmsg(db_) : "out of memory";
    sqlite3_close(db_);
    throw Error("cannot open job store " + path.string() + ": " + msg);
  }
  sqlite3_busy_timeout(db_, 30000);
  try {
    exec(db_, "PRAGMA journal_mode=WAL");
    exec(db_, "PRAGMA synchronous=NORMAL");
    exec(db_, "BEGIN IMMEDIATE");
    exec(db_, kSchema);
    exec(db_, "COMMIT");
  } catch (...) {
    sqlite3_close(db_);
    throw;
  }
}

JobStore::~JobStore() { sqlite3_close(db_); }

bool JobStore::register_app(const std::string& name, Granularity granularity) {
  if (name.empty()) throw InvalidArgument("app name must not be empty");
  std::lock_guard lock(mutex_);
  Txn txn(*this);
  Stmt q(db_, "SELECT 1 FROM apps WHERE name = ?");
  const bool existed = q.bind(1, name).step();
  Stmt s(db_,
         "INSERT INTO apps(name, granularity) VALUES(?, ?) "
         "ON CONFLICT(name) DO UPDATE SET granularity = excluded.granularity");
  s.bind(1, name).bind(2, granularity_name(granularity)).run();
  txn.commit();
  return !existed;
}

AppInfo JobStore::app(const std::string& name) const {
  std::lock_guard lock(mutex_);
  Stmt s(db_, "SELECT name, granularity, avg_runtime, runs FROM apps WHERE name = ?");
  if (!s.bind(1, name).step()) throw NotFound("unknown app '" + name + "'");
  AppInfo a{s.text(0), parse_granularity(s.text(1)), std::nullopt, s.i64(3)};
  if (!s.is_null(2)) a.avg_runtime_s = s.real(2);
  return a;
}

std::vector<AppInfo> JobStore::apps() const {
  std::lock_guard lock(mutex_);
  Stmt s(db_, "SELECT name, granularity, avg_runtime, runs FROM apps ORDER BY name");
  std::vector<AppInfo> out;
  while (s.step()) {
    AppInfo a{s.text(0), parse_granularity(s.text(1)), std::nullopt, s.i64(3)};
    if (!s.is_null(2)) a.avg_runtime_s = s.real(2);
    out.push_back(a);
  }
  return out;
}

void JobStore::log_transition(const std::string& id, std::optional<JobState> from, JobState to, double at,
                              const std::string& worker, const std::string& note) {
  Stmt s(db_,
         "INSERT INTO transitions(job_id, from_state, to_state, at, at_epoch, worker_id, note) "
         "VALUES(?, ?, ?, ?, ?, ?, ?)");
  s.bind(1, id);
  if (from) s.bind(2, state_name(*from));
  else s.bind_null(2);
  s.bind(3, state_name(to)).bind(4, to_iso(at)).bind(5, at).bind(6, worker).bind(7, note).run();
}

void JobStore::set_state(const std::string& id, JobState from, JobState to, double at, const std::string& worker,
                         const std::string& note) {
  Stmt q(db_, "SELECT timestamps FROM jobs WHERE id = ?");
  q.bind(1, id).step();
  json ts = json::parse(q.text(0));
  ts[state_name(to)] = to_iso(at);
  Stmt u(db_, "UPDATE jobs SET state = ?, timestamps = ? WHERE id = ? AND state = ?");
  u.bind(1, state_name(to)).bind(2, ts.dump()).bind(3, id).bind(4, state_name(from)).run();
  if (sqlite3_changes(db_) != 1) throw Conflict("job " + id + " is not " + state_name(from));
  log_transition(id, from, to, at, worker, note);
}

bool JobStore::deps_done(const std::vector<std::string>& deps) const {
  for (const auto& d : deps) {
    Stmt s(db_, "SELECT state FROM jobs WHERE id = ?");
    if (!s.bind(1, d).step() || parse_state(s.text(0)) != JobState::done) return false;
  }
  return true;
}

void JobStore::promote_dependents(const std::string& id, double at) {
  std::vector<std::string> candidates;
  {
    Stmt s(db_,
           "SELECT j.id FROM job_deps d JOIN jobs j ON j.id = d.job_id "
           "WHERE d.dep_id = ? AND j.state = 'CREATED' ORDER BY j.seq");
    s.bind(1, id);
    while (s.step()) candidates.push_back(s.text(0));
  }
  for (const auto& c : candidates) {
    if (deps_done(load(c).deps)) set_state(c, JobState::created, JobState::ready, at, "", "deps done");
  }
}

JobRecord JobStore::load(const std::string& id) const {
  const std::string sql = std::string("SELECT ") + kJobColumns + " FROM jobs WHERE id = ?";
  Stmt s(db_, sql.c_str());
  if (!s.bind(1, id).step()) throw NotFound("unknown job '" + id + "'");
  return read_job(s);
}

JobRecord JobStore::submit_locked(const JobSpec& spec) {
  if (spec.max_attempts < 1) throw InvalidArgument("max_attempts must be >= 1");
  if (!spec.args.is_object()) throw InvalidArgument("job args must be a JSON object");
  {
    Stmt s(db_, "SELECT 1 FROM apps WHERE name = ?");
    if (!s.bind(1, spec.app).step()) throw NotFound("unknown app '" + spec.app + "'");
  }
  for (const auto& d : spec.deps) {
    Stmt s(db_, "SELECT 1 FROM jobs WHERE id = ?");
    if (!s.bind(1, d).step()) throw NotFound("unknown dependency '" + d + "'");
  }
  const double now = epoch_now();
  std::string id;
  for (;;) {
    id = new_job_id();
    Stmt s(db_, "SELECT 1 FROM jobs WHERE id = ?");
    if (!s.bind(1, id).step()) break;
  }
  json ts = {{state_name(JobState::created), to_iso(now)}};
  Stmt ins(db_,
           "INSERT INTO jobs(id, app, args, deps, state, attempts, max_attempts, worker_id, workdir, tags, "
           "timestamps, detail) VALUES(?, ?, ?, ?, 'CREATED', 0, ?, NULL, ?, ?, ?, '')");
  ins.bind(1, id)
      .bind(2, spec.app)
      .bind(3, spec.args.dump())
      .bind(4, json(spec.deps).dump())
      .bind(5, spec.max_attempts)
      .bind(6, spec.workdir)
      .bind(7, json(spec.tags).dump())
      .bind(8, ts.dump())
      .run();
  for (const auto& d : spec.deps) {
    Stmt s(db_, "INSERT INTO job_deps(job_id, dep_id) VALUES(?, ?)");
    s.bind(1, id).bind(2, d).run();
  }
  log_transition(id, std::nullopt, JobState::created, now, "", "submitted");
  if (deps_done(spec.deps)) set_state(id, JobState::created, JobState::ready, now, "", "deps done");
  return load(id);
}

JobRecord JobStore::submit(const JobSpec& spec) {
  std::lock_guard lock(mutex_);
  Txn txn(*this);
  auto r = submit_locked(spec);
  txn.commit();
  return r;
}

std::optional<JobRecord> JobStore::claim_next(const std::string& worker_id) {
  if (worker_id.empty()) throw InvalidArgument("worker id must not be empty");
  std::lock_guard lock(mutex_);
  Txn txn(*this);
  std::string id;
  {
    Stmt s(db_, "SELECT id FROM jobs WHERE state = 'READY' ORDER BY seq LIMIT 1");
    if (!s.step()) return std::nullopt;
    id = s.text(0);
  }
  const double now = epoch_now();
  set_state(id, JobState::ready, JobState::running, now, worker_id, "claimed");
  Stmt u(db_, "UPDATE jobs SET worker_id = ?, attempts = attempts + 1, claimed_at = ? WHERE id = ?");
  u.bind(1, worker_id).bind(2, now).bind(3, id).run();
  auto r = load(id);
  txn.commit();
  return r;
}

void JobStore::complete(const std::string& id, const std::string& worker_id, Outcome outcome,
                        const std::string& detail) {
  std::lock_guard lock(mutex_);
  Txn txn(*this);
  const auto r = load(id);
  if (r.state != JobState::running) {
    throw Conflict("job " + id + " is " + state_name(r.state) + ", not RUNNING");
  }
  if (r.worker_id != worker_id) {
    throw Conflict("job " + id + " is held by " + r.worker_id.value_or("nobody") + ", not " + worker_id);
  }
  const double now = epoch_now();
  double claimed_at = now;
  {
    Stmt s(db_, "SELECT claimed_at FROM jobs WHERE id = ?");
    if (s.bind(1, id).step() && !s.is_null(0)) claimed_at = s.real(0);
  }
  {
    Stmt u(db_, "UPDATE jobs SET detail = ?, worker_id = NULL, claimed_at = NULL WHERE id = ?");
    u.bind(1, detail).bind(2, id).run();
  }
  if (outcome == Outcome::done) {
    set_state(id, JobState::running, JobState::done, now, worker_id, detail);
    const double runtime = std::max(0.0, now - claimed_at);
    Stmt a(db_,
           "UPDATE apps SET avg_runtime = CASE WHEN avg_runtime IS NULL THEN ?1 ELSE 0.8 * avg_runtime + 0.2 * ?1 END, "
           "runs = runs + 1 WHERE name = ?2");
    a.bind(1, runtime).bind(2, r.app).run();
    promote_dependents(id, now);
  } else {
    set_state(id, JobState::running, JobState::failed, now, worker_id, detail);
    if (r.attempts < r.max_attempts) {
      set_state(id, JobState::failed, JobState::ready, now, "",
                "retry " + std::to_string(r.attempts + 1) + "/" + std::to_string(r.max_attempts));
    }
  }
  txn.commit();
}

void JobStore::kill(const std::string& id, const std::string& note) {
  std::lock_guard lock(mutex_);
  Txn txn(*this);
  const auto r = load(id);
  if (is_terminal(r.state)) throw Conflict("job " + id + " is already " + state_name(r.state));
  set_state(id, r.state, JobState::killed, epoch_now(), "", note.empty() ? "killed" : note);
  Stmt u(db_, "UPDATE jobs SET worker_id = NULL, claimed_at = NULL WHERE id = ?");
  u.bind(1, id).run();
  txn.commit();
}

JobRecord JobStore::rerun(const std::string& id, const json& overrides) {
  if (!overrides.is_object()) throw InvalidArgument("rerun overrides must be a JSON object");
  std::lock_guard lock(mutex_);
  Txn txn(*this);
  const auto r = load(id);
  JobSpec spec{r.app, r.args, r.deps, r.tags, r.max_attempts, r.workdir};
  spec.args.merge_patch(overrides);
  spec.tags["rerun_of"] = id;
  auto out = submit_locked(spec);
  std::vector<JobRecord> waiting;
  {
    Stmt s(db_,
           "SELECT j.id FROM job_deps d JOIN jobs j ON j.id = d.job_id "
           "WHERE d.dep_id = ? AND j.state = 'CREATED' ORDER BY j.seq");
    s.bind(1, id);
    while (s.step()) waiting.push_back(load(s.text(0)));
  }
  for (auto& w : waiting) {
    std::replace(w.deps.begin(), w.deps.end(), id, out.id);
    Stmt u(db_, "UPDATE jobs SET deps = ? WHERE id = ?");
    u.bind(1, json(w.deps).dump()).bind(2, w.id).run();
    Stmt d(db_, "UPDATE job_deps SET dep_id = ? WHERE job_id = ? AND dep_id = ?");
    d.bind(1, out.id).bind(2, w.id).bind(3, id).run();
  }
  txn.commit();
  return out;
}

JobRecord JobStore::get(const std::string& id) const {
  std::lock_guard lock(mutex_);
  return load(id);
}

std::optional<JobRecord> JobStore::find(const std::string& id) const {
  std::lock_guard lock(mutex_);
  try {
    return load(id);
  } catch (const NotFound&) {
    return std::nullopt;
  }
}

std::vector<JobRecord> JobStore::list(const JobFilter& filter) const {
  std::lock_guard lock(mutex_);
  std::string sql = std::string("SELECT ") + kJobColumns + " FROM jobs WHERE (?1 IS NULL OR state = ?1) " +
                    "AND (?2 IS NULL OR app = ?2) ORDER BY seq";
  Stmt s(db_, sql.c_str());
  if (filter.state) s.bind(1, state_name(*filter.state));
  if (filter.app) s.bind(2, *filter.app);
  std::vector<JobRecord> out;
  while (s.step()) {
    auto r = read_job(s);
    const bool match = std::all_of(filter.tags.begin(), filter.tags.end(), [&](const auto& kv) {
      const auto it = r.tags.find(kv.first);
      return it != r.tags.end() && it->second == kv.second;
    });
    if (match) out.push_back(std::move(r));
  }
  return out;
}

std::map<JobState, std::size_t> JobStore::counts() const {
  std::lock_guard lock(mutex_);
  std::map<JobState, std::size_t> out;
  for (auto st : {JobState::created, JobState::ready, JobState::running, JobState::done, JobState::failed,
                  JobState::killed}) {
    out[st] = 0;
  }
  Stmt s(db_, "SELECT state, COUNT(*) FROM jobs GROUP BY state");
  while (s.step()) out[parse_state(s.text(0))] = static_cast<std::size_t>(s.i64(1));
  return out;
}

std::size_t JobStore::count(JobState state) const {
  std::lock_guard lock(mutex_);
  Stmt s(db_, "SELECT COUNT(*) FROM jobs WHERE state = ?");
  s.bind(1, state_name(state)).step();
  return static_cast<std::size_t>(s.i64(0));
}

std::vector<Transition> JobStore::transitions(const std::string& job_id) const {
  std::lock_guard lock(mutex_);
  Stmt s(db_,
         "SELECT seq, job_id, from_state, to_state, at, at_epoch, worker_id, note FROM transitions "
         "WHERE ?1 = '' OR job_id = ?1 ORDER BY seq");
  s.bind(1, job_id);
  std::vector<Transition> out;
  while (s.step()) {
    Transition t;
    t.seq = s.i64(0);
    t.job_id = s.text(1);
    if (!s.is_null(2)) t.from = parse_state(s.text(2));
    t.to = parse_state(s.text(3));
    t.at = s.text(4);
    t.at_epoch = s.real(5);
    t.worker_id = s.text(6);
    t.note = s.text(7);
    out.push_back(std::move(t));
  }
  return out;
}

void JobStore::append_output(const std::string& id, const std::string& text) {
  std::lock_guard lock(mutex_);
  Txn txn(*this);
  load(id);
  std::string current;
  {
    Stmt s(db_, "SELECT text FROM job_output WHERE job_id = ?");
    if (s.bind(1, id).step()) current = s.text(0);
  }
  current += text;
  if (current.size() > kOutputKeep) current.erase(0, current.size() - kOutputKeep);
  Stmt u(db_, "INSERT INTO job_output(job_id, text) VALUES(?1, ?2) ON CONFLICT(job_id) DO UPDATE SET text = ?2");
  u.bind(1, id).bind(2, current).run();
  txn.commit();
}

std::string JobStore::output_tail(const std::string& id, std::size_t max_bytes) const {
  std::lock_guard lock(mutex_);
  Stmt s(db_, "SELECT text FROM job_output WHERE job_id = ?");
  if (!s.bind(1, id).step()) return {};
  auto text = s.text(0);
  if (text.size() > max_bytes) text.erase(0, text.size() - max_bytes);
  return text;
}

double JobStore::lease_seconds(const std::string& app_name, double min_lease_s) const {
  const auto a = app(app_name);
  return a.avg_runtime_s ? std::max(min_lease_s, 10.0 * *a.avg_runtime_s) : min_lease_s;
}

std::vector<std::string> JobStore::requeue_stale(double min_lease_s) {
  std::lock_guard lock(mutex_);
  Txn txn(*this);
  const double now = epoch_now();
  std::vector<std::tuple<std::string, std::string, double, std::string>> running;
  {
    Stmt s(db_, "SELECT id, app, claimed_at, worker_id FROM jobs WHERE state = 'RUNNING' ORDER BY seq");
    while (s.step()) running.emplace_back(s.text(0), s.text(1), s.is_null(2) ? now : s.real(2), s.text(3));
  }
  std::vector<std::string> touched;
  for (const auto& [id, app_name, claimed_at, worker] : running) {
    const double lease = lease_seconds(app_name, min_lease_s);
    if (now - claimed_at <= lease) continue;
    const auto r = load(id);
    const std::string note = "lease of " + std::to_string(lease) + " s expired for worker " + worker;
    Stmt u(db_, "UPDATE jobs SET worker_id = NULL, claimed_at = NULL, detail = ? WHERE id = ?");
    u.bind(1, note).bind(2, id).run();
    if (r.attempts < r.max_attempts) {
      set_state(id, JobState::running, JobState::ready, now, "", note);
    } else {
      set_state(id, JobState::running, JobState::failed, now, "", note);
    }
    touched.push_back(id);
  }
  txn.commit();
  return touched;
}

void JobStore::put_dataset(const DatasetRecord& d) {
  if (d.name.empty()) throw InvalidArgument("dataset name must not be empty");
  std::lock_guard lock(mutex_);
  Txn txn(*this);
  Stmt s(db_,
         "INSERT INTO datasets(name, root, info, created_at) VALUES(?1, ?2, ?3, ?4) "
         "ON CONFLICT(name) DO UPDATE SET root = ?2, info = ?3");
  s.bind(1, d.name).bind(2, d.root.string()).bind(3, d.info.dump()).bind(4, utc_now_iso()).run();
  txn.commit();
}

DatasetRecord JobStore::dataset(const std::string& name) const {
  std::lock_guard lock(mutex_);
  Stmt s(db_, "SELECT name, root, info, created_at FROM datasets WHERE name = ?");
  if (!s.bind(1, name).step()) throw NotFound("unknown dataset '" + name + "'");
  return {s.text(0), s.text(1), json::parse(s.text(2)), s.text(3)};
}

std::vector<DatasetRecord> JobStore::datasets() const {
  std::lock_guard lock(mutex_);
  Stmt s(db_, "SELECT name, root, info, created_at FROM datasets ORDER BY name");
  std::vector<DatasetRecord> out;
  while (s.step()) out.push_back({s.text(0), s.text(1), json::parse(s.text(2)), s.text(3)});
  return out;
}

void JobStore::put_sweep(const std::string& id, const json& report) {
  std::lock_guard lock(mutex_);
  Txn txn(*this);
  Stmt s(db_,
         "INSERT INTO sweeps(id, report, created_at) VALUES(?1, ?2, ?3) "
         "ON CONFLICT(id) DO UPDATE SET report = ?2");
  s.bind(1, id).bind(2, report.dump()).bind(3, utc_now_iso()).run();
  txn.commit();
}

json JobStore::sweep(const std::string& id) const {
  std::lock_guard lock(mutex_);
  Stmt s(db_, "SELECT report FROM sweeps WHERE id = ?");
  if (!s.bind(1, id).step()) throw NotFound("unknown sweep '" + id + "'");
  return json::parse(s.text(0));
}

void JobStore::put_review(const std::string& dataset, int section, const std::string& verdict,
                          const std::string& job_id) {
  std::lock_guard lock(mutex_);
  Txn txn(*this);
  Stmt s(db_,
         "INSERT INTO reviews(dataset, section, verdict, job_id, at) VALUES(?1, ?2, ?3, ?4, ?5) "
         "ON CONFLICT(dataset, section) DO UPDATE SET verdict = ?3, job_id = ?4, at = ?5");
  s.bind(1, dataset).bind(2, section).bind(3, verdict).bind(4, job_id).bind(5, utc_now_iso()).run();
  txn.commit();
}

json JobStore::reviews(const std::string& dataset) const {
  std::lock_guard lock(mutex_);
  Stmt s(db_, "SELECT section, verdict, job_id, at FROM reviews WHERE dataset = ? ORDER BY section");
  s.bind(1, dataset);
  json out = json::array();
  while (s.step()) {
    out.push_back({{"section", s.i64(0)}, {"verdict", s.text(1)}, {"job_id", s.text(2)}, {"at", s.text(3)}});
  }
  return out;
}

void JobStore::set_meta(const std::string& key, const std::string& value) {
  std::lock_guard lock(mutex_);
  Txn txn(*this);
  Stmt s(db_, "INSERT INTO meta(key, value) VALUES(?1, ?2) ON CONFLICT(key) DO UPDATE SET value = ?2");
  s.bind(1, key).bind(2, value).run();
  txn.commit();
}

std::optional<std::string> JobStore::meta(const std::string& key) const {
  std::lock_guard lock(mutex_);
  Stmt s(db_, "SELECT value FROM meta WHERE key = ?");
  if (!s.bind(1, key).step()) return std::nullopt;
  return s.text(0);
}

}  // namespace emflow::workflow
