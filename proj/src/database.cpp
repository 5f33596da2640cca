#include "kgmem/database.hpp"

#include "kgmem/error.hpp"
#include "kgmem_embedded_schema.hpp"

#include <sqlite3.h>

namespace kgmem {
namespace {

[[noreturn]] void fail(sqlite3* db, const std::string& what) {
    throw StorageError(what + ": " + (db ? sqlite3_errmsg(db) : "no connection"));
}

}  // namespace

Database::Database(const std::string& path) : path_(path) {
    const int flags = SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE | SQLITE_OPEN_FULLMUTEX;
    if (sqlite3_open_v2(path.c_str(), &db_, flags, nullptr) != SQLITE_OK) {
        std::string msg = "cannot open database '" + path + "'";
        if (db_) {
            msg += ": ";
            msg += sqlite3_errmsg(db_);
            sqlite3_close(db_);
            db_ = nullptr;
        }
        throw StorageError(msg);
    }
    sqlite3_busy_timeout(db_, 5000);
    try {
        if (path != ":memory:") exec("PRAGMA journal_mode=WAL");
        exec("PRAGMA foreign_keys=ON");
        migrate();
    } catch (...) {
        sqlite3_close(db_);
        db_ = nullptr;
        throw;
    }
}

Database::~Database() {
    if (db_) sqlite3_close(db_);
}

void Database::exec(std::string_view sql) {
    auto guard = lock();
    char* err = nullptr;
    const std::string text(sql);
    if (sqlite3_exec(db_, text.c_str(), nullptr, nullptr, &err) != SQLITE_OK) {
        std::string msg = err ? err : "unknown error";
        sqlite3_free(err);
        throw StorageError("sql failed: " + msg);
    }
}

Statement Database::prepare(std::string_view sql) { return Statement(db_, sql); }

std::int64_t Database::last_insert_rowid() const { return sqlite3_last_insert_rowid(db_); }

int Database::schema_version() {
    auto guard = lock();
    auto st = prepare("SELECT value FROM schema_meta WHERE key = 'version'");
    if (!st.step()) throw CorruptionError("schema_meta has no version row");
    return std::stoi(st.column_text(0));
}

void Database::migrate() {
    auto guard = lock();
    auto probe = prepare("SELECT count(*) FROM sqlite_master WHERE type = 'table' AND name = 'schema_meta'");
    probe.step();
    const bool initialized = probe.column_int64(0) > 0;
    if (!initialized) {
        auto others = prepare("SELECT count(*) FROM sqlite_master WHERE type = 'table'");
        others.step();
        if (others.column_int64(0) > 0) {
            throw StorageError("database '" + path_ + "' has tables but no kgmem schema");
        }
        exec("BEGIN");
        try {
            exec(kSchemaSql);
            exec("COMMIT");
        } catch (...) {
            exec("ROLLBACK");
            throw;
        }
    }
    const int version = schema_version();
    if (version != kSchemaVersion) {
        throw StorageError("database '" + path_ + "' has schema version " + std::to_string(version) +
                           ", this build expects " + std::to_string(kSchemaVersion));
    }
}

Statement::Statement(sqlite3* db, std::string_view sql) : db_(db) {
    if (sqlite3_prepare_v2(db_, sql.data(), static_cast<int>(sql.size()), &stmt_, nullptr) != SQLITE_OK) {
        fail(db_, "prepare failed for '" + std::string(sql) + "'");
    }
}

Statement::~Statement() {
    if (stmt_) sqlite3_finalize(stmt_);
}

Statement::Statement(Statement&& other) noexcept : db_(other.db_), stmt_(other.stmt_) { other.stmt_ = nullptr; }

Statement& Statement::bind(int index, std::int64_t value) {
    if (sqlite3_bind_int64(stmt_, index, value) != SQLITE_OK) fail(db_, "bind failed");
    return *this;
}

Statement& Statement::bind(int index, std::string_view value) {
    if (sqlite3_bind_text(stmt_, index, value.data(), static_cast<int>(value.size()), SQLITE_TRANSIENT) !=
        SQLITE_OK) {
        fail(db_, "bind failed");
    }
    return *this;
}

Statement& Statement::bind_null(int index) {
    if (sqlite3_bind_null(stmt_, index) != SQLITE_OK) fail(db_, "bind failed");
    return *this;
}

Statement& Statement::bind(int index, const std::optional<std::int64_t>& value) {
    return value ? bind(index, *value) : bind_null(index);
}

bool Statement::step() {
    const int rc = sqlite3_step(stmt_);
    if (rc == SQLITE_ROW) return true;
    if (rc == SQLITE_DONE) return false;
    fail(db_, "step failed");
}

void Statement::run() {
    while (step()) {
    }
}

std::int64_t Statement::column_int64(int col) const { return sqlite3_column_int64(stmt_, col); }

std::string Statement::column_text(int col) const {
    const auto* p = reinterpret_cast<const char*>(sqlite3_column_text(stmt_, col));
    const int n = sqlite3_column_bytes(stmt_, col);
    return p ? std::string(p, static_cast<std::size_t>(n)) : std::string();
}

bool Statement::column_is_null(int col) const { return sqlite3_column_type(stmt_, col) == SQLITE_NULL; }

Transaction::Transaction(Database& db) : db_(db), lock_(db.lock()) { db_.exec("BEGIN IMMEDIATE"); }

Transaction::~Transaction() {
    if (!done_) {
        try {
            db_.exec("ROLLBACK");
        } catch (...) {
        }
    }
}

void Transaction::commit() {
    db_.exec("COMMIT");
    done_ = true;
}

}  // namespace kgmem
