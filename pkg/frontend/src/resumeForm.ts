/** Resume a past run by identifier.
 *
 * A valid run id creates a session seeded with the stored summary and the
 * prior file listing. An unknown id is reported inline; the service
 * returns 404 before any session exists, so there is nothing to clean up.
 */

import { ApiClient, ApiError } from "./api.js";
import { SessionStore } from "./sessionView.js";

export type ResumeResult =
  | { ok: true; store: SessionStore; parentRun: string | null }
  | { ok: false; error: string };

export async function submitResume(
  api: ApiClient,
  runId: string,
  checkpointRoot?: string,
): Promise<ResumeResult> {
  const trimmed = runId.trim();
  if (!trimmed) {
    return { ok: false, error: "enter a run id" };
  }
  let info;
  try {
    info = await api.createSession({
      run_id: trimmed,
      ...(checkpointRoot ? { checkpoint_root: checkpointRoot } : {}),
    });
  } catch (exc) {
    if (exc instanceof ApiError && exc.status === 404) {
      return { ok: false, error: exc.detail };
    }
    throw exc;
  }
  const store = new SessionStore(info.session_id, info.summary);
  store.setFiles(await api.listFiles(info.session_id));
  return { ok: true, store, parentRun: info.parent_run };
}
