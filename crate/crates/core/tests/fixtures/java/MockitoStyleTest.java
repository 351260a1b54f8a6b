import static org.mockito.Mockito.mock;
import static org.mockito.Mockito.verify;
import static org.mockito.Mockito.when;

import org.junit.Test;

public class MockitoStyleTest {

    @Test
    public void stubsRepository() {
        UserRepository repo = mock(UserRepository.class);
        when(repo.findName(42L)).thenReturn("Ada");
        UserService service = new UserService(repo);
        assertEquals("Hello, Ada", service.greet(42L));
        verify(repo).findName(42L);
    }
}
