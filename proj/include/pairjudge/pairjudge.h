// Copyright 2026 The pairjudge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PAIRJUDGE_PAIRJUDGE_H_
#define PAIRJUDGE_PAIRJUDGE_H_

#ifdef __cplusplus
extern "C" {
#endif

#if defined(PJ_BUILDING_LIBRARY)
#define PJ_API __attribute__((visibility("default")))
#else
#define PJ_API
#endif

/* Status codes double as CLI exit codes. */
typedef enum pj_status {
  PJ_OK = 0,
  PJ_ERR_INVALID_ARGUMENT = 1,
  PJ_ERR_CONFIG = 2,
  PJ_ERR_INFRASTRUCTURE = 3,
  PJ_ERR_DATA = 4
} pj_status;

typedef struct pj_app pj_app;

/* Loads and parses a configuration file. On success *out owns a handle that
 * must be released with pj_app_free. */
PJ_API pj_status pj_app_load(const char* config_path, pj_app** out);
PJ_API void pj_app_free(pj_app* app);

/* Flag overrides applied to the next command: "out", "seed", "mode",
 * "rounds", "dry_run" ("1"/"0"). */
PJ_API pj_status pj_app_set_override(pj_app* app, const char* key, const char* value);

/* Commands. On success *output receives the text meant for standard output;
 * free it with pj_string_free. output may be NULL. */
PJ_API pj_status pj_build_corpus(pj_app* app, char** output);
PJ_API pj_status pj_judge(pj_app* app, char** output);
PJ_API pj_status pj_bench(pj_app* app, char** output);
PJ_API pj_status pj_verify(pj_app* app, char** output);

/* Checks one response against one constraint spec given as JSON
 * {"category", "params"}. *result_json receives {"pass", "detail"}. */
PJ_API pj_status pj_check_constraint(const char* response, const char* spec_json, int strict,
                                     char** result_json);

PJ_API pj_status pj_normalize_question(const char* text, char** out);
PJ_API pj_status pj_extract_fenced_code(const char* markdown, const char* tag, char** out);

/* Fingerprint of a chat request given as JSON. */
PJ_API pj_status pj_fingerprint(const char* request_json, char** out);

/* JSON {"error": {"kind", "message"}} for the last failure on this thread,
 * or "" when the last call succeeded. Valid until the next call. */
PJ_API const char* pj_last_error(void);

PJ_API void pj_string_free(char* s);
PJ_API const char* pj_version(void);

#ifdef __cplusplus
}
#endif

#endif /* PAIRJUDGE_PAIRJUDGE_H_ */
